"""
Export and Reporting Module
Writes simulation and reconstruction outputs as CSV and JSON for plotting
pipelines, and formats plain-text summaries for the terminal.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence
import logging

import numpy as np

try:
    from .shared_utils import format_float, to_native
except (ImportError, ValueError):
    from shared_utils import format_float, to_native

logger = logging.getLogger(__name__)


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


class ExportEngine:
    """Write CSV and JSON outputs into one directory."""

    def __init__(self, output_dir: str = "./output"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def write_csv(self, rows: Iterable[Dict[str, Any]], filename: str,
                  fieldnames: Optional[Sequence[str]] = None) -> Path:
        """
        Write rows to CSV with floats at 9 significant digits.

        Args:
            rows: Row dictionaries
            filename: Output filename inside output_dir
            fieldnames: Column order; defaults to the keys of the first row

        Returns:
            Path to the written file
        """
        rows = list(rows)
        if fieldnames is None:
            if not rows:
                raise ValueError(f"Cannot infer columns for empty table {filename}")
            fieldnames = list(rows[0].keys())

        output_path = self.output_dir / filename
        with open(output_path, "w", newline="") as csvfile:
            writer = csv.DictWriter(csvfile, fieldnames=list(fieldnames), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({key: _cell(value) for key, value in row.items()})

        logger.info(f"Wrote {len(rows)} rows to {output_path}")
        return output_path

    def write_json(self, data: Dict[str, Any], filename: str) -> Path:
        """Write a JSON document with numpy values converted to native types."""
        output_path = self.output_dir / filename
        with open(output_path, "w") as f:
            json.dump(to_native(data), f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info(f"Wrote {output_path}")
        return output_path

    def write_time_tags(self, stream_1: np.ndarray, stream_2: np.ndarray,
                        filename: str = "time_tags.csv") -> Path:
        """Time tags as detector,time_s rows, detector 1 first."""
        rows = [{"detector": 1, "time_s": t} for t in stream_1]
        rows += [{"detector": 2, "time_s": t} for t in stream_2]
        return self.write_csv(rows, filename, ["detector", "time_s"])

    def write_histogram(self, tau_axis: np.ndarray, counts: np.ndarray,
                        filename: str = "histogram.csv") -> Path:
        rows = [{"tau_s": tau, "counts": int(n)} for tau, n in zip(tau_axis, counts)]
        return self.write_csv(rows, filename, ["tau_s", "counts"])

    def write_joint_grid(self, nu_thz: np.ndarray, theta_s: np.ndarray, theta_i: np.ndarray,
                         values: np.ndarray, filename: str = "joint_grid.csv") -> Path:
        """Joint rate grid flattened to omega_thz,theta_s_rad,theta_i_rad,rate rows."""
        rows = (
            {"omega_thz": nu_thz[a], "theta_s_rad": theta_s[b], "theta_i_rad": theta_i[c], "rate": values[a, b, c]}
            for a in range(len(nu_thz)) for b in range(len(theta_s)) for c in range(len(theta_i))
        )
        return self.write_csv(rows, filename, ["omega_thz", "theta_s_rad", "theta_i_rad", "rate"])


# ============================================================================
# TEXT REPORTS
# ============================================================================

def _header(title: str) -> List[str]:
    return ["=" * 60, title, "=" * 60]


def format_scenarios_report(rates: Dict[str, float], ratio: Any, layer_count: int,
                            thickness_table: Optional[List] = None) -> str:
    """Scenario rates and the counter-to-co ratio."""
    report = _header("EMISSION SCENARIOS")
    report.append(f"\n[FILM] {layer_count} layer(s)")
    report.append("\n[SCENARIO RATES] (arbitrary units)")
    for key, value in rates.items():
        report.append(f"  {key}: {value:.6e}")
    report.append(f"\n  Counter/co ratio: {ratio}")
    if thickness_table:
        report.append("\n[RATIO VS THICKNESS]")
        for layers, value in thickness_table:
            report.append(f"  {layers:>5d} layers: {value:.4f}")
    report.append("\n" + "=" * 60)
    return "\n".join(report)


def format_bandwidth_report(summary: Dict[str, Any]) -> str:
    report = _header("EMISSION BANDWIDTH")
    report.append(f"\n  FWHM bandwidth: {summary['bandwidth_thz']:.2f} THz")
    report.append(f"  Half-maximum edges: {summary['nu_low_thz']:.2f} - {summary['nu_high_thz']:.2f} THz")
    report.append(f"  Wavelength span: {summary['wavelength_span_nm']:.1f} nm")
    report.append(f"  Correlation time: {summary['correlation_time_fs']:.2f} fs")
    report.append("\n" + "=" * 60)
    return "\n".join(report)


def format_g2_report(summary: Dict[str, Any]) -> str:
    report = _header("COINCIDENCE STATISTICS")
    report.append(f"\n  Singles: {summary['singles_1_hz']:.1f} Hz / {summary['singles_2_hz']:.1f} Hz")
    report.append(f"  g2(0): {summary['g2_zero']:.3f}")
    if summary.get("g2_zero_analytic") is not None:
        report.append(f"  g2(0) analytic: {summary['g2_zero_analytic']:.3f}")
    report.append(f"  Coincidence rate: {summary['coincidence_rate_hz']:.3f} Hz")
    report.append(f"  CAR: {summary['car']:.2f}")
    if summary.get("loss_corrected_rate_hz") is not None:
        report.append(f"  Loss-corrected rate: {summary['loss_corrected_rate_hz']:.3f} Hz")
    report.append("\n" + "=" * 60)
    return "\n".join(report)


def format_tomography_report(summary: Dict[str, Any]) -> str:
    """Reconstructed density matrix and figures of merit."""
    report = _header("STATE TOMOGRAPHY")
    report.append("\n[DENSITY MATRIX] (HH, HV, VH, VV)")
    for row in summary["rho"]:
        report.append("  " + "  ".join(f"{re:+.3f}{im:+.3f}i" for re, im in row))
    report.append("\n[METRICS]")
    if summary.get("fidelity") is not None:
        report.append(f"  Fidelity: {summary['fidelity']:.4f}")
    report.append(f"  Concurrence: {summary['concurrence']:.4f}")
    report.append(f"  Purity: {summary['purity']:.4f}")
    report.append(f"  Log-likelihood: {summary['log_likelihood']:.3f}")
    report.append(f"  Converged: {summary['converged']} ({summary['iterations']} iterations)")
    report.append("\n" + "=" * 60)
    return "\n".join(report)
