"""
Command-line entry point for the thin-film SPDC toolkit.

Subcommands: spectrum, profile, scenarios, bandwidth, coherence, simulate,
g2, tomo, state, shg. Each reads one JSON config (flags override file values),
writes CSV/JSON into --out and prints a text report, or a JSON summary with --json.
"""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional
import argparse
import json
import logging
import math
import sys

import numpy as np

try:
    from . import dispersion, photon_stats, polarization, spdc_model, tomography
    from .export_reporting import (
        ExportEngine, format_bandwidth_report, format_g2_report,
        format_scenarios_report, format_tomography_report,
    )
    from .run_config import ConfigError, RunConfig, config_keys, load_run_config
    from .shared_utils import DomainError, NumericalError, to_native
except (ImportError, ValueError):
    import dispersion, photon_stats, polarization, spdc_model, tomography
    from export_reporting import (
        ExportEngine, format_bandwidth_report, format_g2_report,
        format_scenarios_report, format_tomography_report,
    )
    from run_config import ConfigError, RunConfig, config_keys, load_run_config
    from shared_utils import DomainError, NumericalError, to_native

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

SEEDED_COMMANDS = ("simulate", "g2", "tomo")


def setup_logging(log_level: str = "WARNING", log_file: str = None):
    """Configure logging for the application; console logs go to stderr."""
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    level = getattr(logging, log_level.upper(), logging.WARNING)

    logging.basicConfig(
        level=level,
        format=log_format,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter(log_format))
        logging.getLogger().addHandler(file_handler)


def _stage(args, message: str):
    if args.verbose:
        print(message, file=sys.stderr)


def _parse_list(text: str, cast: Callable = float) -> List:
    try:
        return [cast(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ValueError(f"Expected a comma-separated list of numbers, got '{text}'")


def _windows(config: RunConfig):
    return config.window_forward, config.window_backward


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def cmd_spectrum(args, config: RunConfig, engine: ExportEngine):
    film, pump, grids = config.film, config.pump, config.grids
    omega_axis = spdc_model.band_omega_axis(pump, config.window_forward.lambda_band_nm, grids.omega_points)
    theta_axis = spdc_model.periodic_theta_axis(grids.theta_points)

    _stage(args, "[1/2] Computing frequency-angular spectrum...")
    spectrum = spdc_model.frequency_angular_spectrum(film, pump, omega_axis, theta_axis,
                                                     grids.theta_points, grids.chunk_size)
    nu = omega_axis / (2.0 * np.pi) / 1e12
    rows = ({"omega_thz": nu[a], "theta_s_rad": theta_axis[b], "rate": spectrum[a, b]}
            for a in range(len(nu)) for b in range(len(theta_axis)))
    files = {"spectrum": str(engine.write_csv(rows, "spectrum.csv", ["omega_thz", "theta_s_rad", "rate"]))}

    if args.joint:
        _stage(args, "[2/2] Computing joint rate grid...")
        points = args.joint_points
        joint_omega = spdc_model.band_omega_axis(pump, config.window_forward.lambda_band_nm, points)
        joint_theta = spdc_model.periodic_theta_axis(points)
        grid = spdc_model.joint_rate_grid(film, pump, joint_omega, joint_theta, joint_theta, grids.chunk_size)
        files["joint"] = str(engine.write_joint_grid(joint_omega / (2.0 * np.pi) / 1e12, joint_theta,
                                                     joint_theta, grid.values))
    _stage(args, "✓ Spectrum complete")

    peak = np.unravel_index(int(np.argmax(spectrum)), spectrum.shape)
    summary = {
        "layer_count": film.layer_count,
        "shape": list(spectrum.shape),
        "peak_omega_thz": nu[peak[0]],
        "peak_theta_s_rad": theta_axis[peak[1]],
        "files": files,
    }
    text = f"Frequency-angular spectrum {spectrum.shape} written to {files['spectrum']}"
    return summary, text


def cmd_profile(args, config: RunConfig, engine: ExportEngine):
    profile = spdc_model.angular_emission_profile(config.film, config.pump,
                                                  config.window_forward.lambda_band_nm, config.grids)
    rows = ({"theta_rad": t, "signal": s, "idler": i}
            for t, s, i in zip(profile.theta_axis, profile.signal, profile.idler))
    path = engine.write_csv(rows, "profile.csv", ["theta_rad", "signal", "idler"])

    forward, backward = spdc_model.forward_backward_integrals(profile.theta_axis, profile.signal)
    summary = {
        "layer_count": config.film.layer_count,
        "signal_forward": forward,
        "signal_backward": backward,
        "forward_fraction": forward / (forward + backward),
        "files": {"profile": str(path)},
    }
    text = f"Signal forward/backward emission: {forward:.4e} / {backward:.4e} (profile in {path})"
    return summary, text


def cmd_scenarios(args, config: RunConfig, engine: ExportEngine):
    window_forward, window_backward = _windows(config)
    _stage(args, "[1/2] Integrating scenario rates...")
    rates = spdc_model.scenario_rates(config.film, config.pump, window_forward, window_backward, config.grids)
    ratio = spdc_model.counter_to_co_ratio(rates)
    files = {"scenarios": str(engine.write_csv(
        [{"scenario": key, "rate": value} for key, value in rates.as_dict().items()],
        "scenarios.csv", ["scenario", "rate"]))}

    table = None
    if args.layers:
        _stage(args, "[2/2] Scanning film thickness...")
        table = spdc_model.ratio_vs_thickness(_parse_list(args.layers, int), config.film, config.pump,
                                              window_forward, window_backward, config.grids)
        files["ratio_vs_thickness"] = str(engine.write_csv(
            [{"layers": layers, "thickness_nm": dispersion.layers_to_thickness(layers) * 1e9, "ratio": value}
             for layers, value in table],
            "ratio_vs_thickness.csv", ["layers", "thickness_nm", "ratio"]))
    _stage(args, "✓ Scenarios complete")

    summary = {
        "layer_count": config.film.layer_count,
        "rates": rates.as_dict(),
        "ratio": math.inf if ratio.is_infinite else ratio.value,
        "files": files,
    }
    if table is not None:
        summary["ratio_vs_thickness"] = [{"layers": layers, "ratio": value} for layers, value in table]
    ratio_text = "inf" if ratio.is_infinite else f"{ratio.value:.4f}"
    return summary, format_scenarios_report(rates.as_dict(), ratio_text, config.film.layer_count, table)


def cmd_bandwidth(args, config: RunConfig, engine: ExportEngine):
    width = config.window_forward.angular_full_width
    spectrum = spdc_model.emission_spectrum(config.film, config.pump, None, width, args.arrangement, config.grids)
    nu_low, nu_high = spdc_model.half_maximum_edges(spectrum)
    bandwidth = nu_high - nu_low

    rows = ({"omega_thz": nu, "wavelength_nm": lam, "density": d}
            for nu, lam, d in zip(spectrum.nu_thz, spectrum.wavelength_nm, spectrum.density))
    files = {"emission_spectrum": str(engine.write_csv(rows, "emission_spectrum.csv",
                                                       ["omega_thz", "wavelength_nm", "density"]))}
    summary = {
        "layer_count": config.film.layer_count,
        "arrangement": args.arrangement,
        "bandwidth_thz": bandwidth,
        "nu_low_thz": nu_low,
        "nu_high_thz": nu_high,
        "wavelength_span_nm": spdc_model.wavelength_span_nm(spectrum),
        "correlation_time_fs": spdc_model.correlation_time(bandwidth),
        "files": files,
    }

    if args.filter_scan:
        lo, hi = config.window_forward.lambda_band_nm
        centers = np.arange(lo + 0.5 * args.filter_width_nm, hi, args.filter_width_nm)
        scan = spdc_model.filter_scan(config.film, config.pump, centers, args.filter_width_nm, width,
                                      args.arrangement, grids=config.grids)
        files["filter_scan"] = str(engine.write_csv(
            [{"center_nm": c, "relative_rate": r} for c, r in scan],
            "filter_scan.csv", ["center_nm", "relative_rate"]))
    return summary, format_bandwidth_report(summary)


def cmd_coherence(args, config: RunConfig, engine: ExportEngine):
    pumps = args.pump_nm or [config.pump.lambda_p_nm]
    lengths = dispersion.coherence_length_scan(config.film, pumps)
    entries = [
        {
            "lambda_pump_nm": lam,
            "coherence_length_um": math.inf if result.is_infinite else result.micrometers,
            "is_infinite": result.is_infinite,
        }
        for lam, result in zip(pumps, lengths)
    ]
    path = engine.write_csv(entries, "coherence.csv", ["lambda_pump_nm", "coherence_length_um", "is_infinite"])
    summary = {"dispersion_model": config.film.dispersion.to_dict(), "coherence": entries,
               "files": {"coherence": str(path)}}
    text = "\n".join(f"Coherence length at {e['lambda_pump_nm']:g} nm pump: {e['coherence_length_um']:.4f} um"
                     for e in entries)
    return summary, text


def cmd_simulate(args, config: RunConfig, engine: ExportEngine):
    sim = config.simulation
    power = config.pump.power_mw
    s1, s2 = photon_stats.simulate_time_tags(sim.source, sim.detector_1, sim.detector_2,
                                             power, sim.duration_s, sim.seed)
    files = {}
    if args.write_tags:
        files["time_tags"] = str(engine.write_time_tags(s1, s2))
    summary = {
        "power_mw": power,
        "duration_s": sim.duration_s,
        "seed": sim.seed,
        "singles_1_hz": s1.size / sim.duration_s,
        "singles_2_hz": s2.size / sim.duration_s,
        "files": files,
    }
    text = [f"Singles at {power:g} mW: {summary['singles_1_hz']:.2f} Hz / {summary['singles_2_hz']:.2f} Hz"]

    if args.powers is not None:
        powers = list(sim.powers_mw) if args.powers == "config" else _parse_list(args.powers)
        _stage(args, f"[1/1] Sweeping {len(powers)} pump powers...")
        points = photon_stats.power_sweep(sim.source, sim.detector_1, sim.detector_2, powers, sim.duration_s,
                                          sim.seed, sim.bin_width_s, sim.tau_range_s, sim.exclusion_sigmas)
        fit = photon_stats.fit_power_sweep(points)
        files["power_sweep"] = str(engine.write_csv(
            [{"power_mw": p, "coincidence_rate_hz": r} for p, r in points],
            "power_sweep.csv", ["power_mw", "coincidence_rate_hz"]))
        summary["power_sweep"] = [{"power_mw": p, "coincidence_rate_hz": r} for p, r in points]
        summary["fit"] = {"slope_hz_per_mw": fit.slope, "intercept_hz": fit.intercept, "r_squared": fit.r_squared}
        text.append(f"Linear fit: slope {fit.slope:.4f} Hz/mW, intercept {fit.intercept:.4f} Hz, "
                    f"R^2 {fit.r_squared:.4f}")
    return summary, "\n".join(text)


def cmd_g2(args, config: RunConfig, engine: ExportEngine):
    sim = config.simulation
    power = config.pump.power_mw
    s1, s2 = photon_stats.simulate_time_tags(sim.source, sim.detector_1, sim.detector_2,
                                             power, sim.duration_s, sim.seed)
    hist = photon_stats.coincidence_histogram(s1, s2, sim.bin_width_s, sim.tau_range_s, sim.duration_s)
    exclusion = photon_stats.default_exclusion_half_width(sim.detector_1, sim.detector_2, sim.exclusion_sigmas)
    g2, g2_zero = photon_stats.g2_from_histogram(hist, exclusion)
    coincidence_rate = photon_stats.coincidence_peak_rate(hist, exclusion)

    files = {
        "histogram": str(engine.write_histogram(hist.tau_axis, hist.counts)),
        "g2": str(engine.write_csv([{"tau_s": t, "g2": g} for t, g in zip(hist.tau_axis, g2)],
                                   "g2.csv", ["tau_s", "g2"])),
    }
    singles_1 = s1.size / sim.duration_s
    singles_2 = s2.size / sim.duration_s
    true_rate = sim.source.pair_rate_per_mw * power * sim.detector_1.efficiency * sim.detector_2.efficiency
    analytic = None
    if singles_1 > 0 and singles_2 > 0:
        analytic = photon_stats.analytic_g2_zero(true_rate, singles_1, singles_2, sim.bin_width_s)

    summary = {
        "power_mw": power,
        "singles_1_hz": singles_1,
        "singles_2_hz": singles_2,
        "g2_zero": g2_zero,
        "g2_zero_analytic": analytic,
        "coincidence_rate_hz": coincidence_rate,
        "car": photon_stats.coincidence_to_accidental_ratio(hist, exclusion),
        "loss_corrected_rate_hz": (photon_stats.loss_corrected_rate(coincidence_rate, sim.transmission_chain)
                                   if sim.transmission_chain else None),
        "files": files,
    }
    return summary, format_g2_report(summary)


def _target_state(args, config: RunConfig) -> polarization.TwoPhotonState:
    if args.target:
        return polarization.bell_state(args.target)
    return polarization.pair_state_from_pump(config.pump.polarization_theta)


def cmd_tomo(args, config: RunConfig, engine: ExportEngine):
    tomo = config.tomography
    target = _target_state(args, config)
    files = {}

    if args.counts:
        records = tomography.read_counts_csv(args.counts)
    else:
        _stage(args, "[1/2] Simulating tomography counts...")
        rho = tomography.werner_state(polarization.pair_state_from_pump(config.pump.polarization_theta),
                                      tomo.werner_p)
        records = tomography.simulate_counts(rho, tomo.settings, tomo.mean_total, config.simulation.seed,
                                             handedness=tomo.handedness)
    if args.write_counts:
        files["counts"] = str(tomography.write_counts_csv(str(engine.output_dir / "counts.csv"), records))
    if tomo.subtract_accidentals:
        records = tomography.subtract_accidentals(records, tomo.accidental_counts)

    _stage(args, "[2/2] Maximum-likelihood reconstruction...")
    result = tomography.mle_reconstruct(records, target=target, max_iterations=tomo.max_iterations,
                                        handedness=tomo.handedness)
    summary = tomography.result_to_dict(result)
    files["tomography"] = str(engine.write_json(summary, "tomography.json"))
    _stage(args, "✓ Reconstruction complete")
    return dict(summary, files=files), format_tomography_report(summary)


def cmd_state(args, config: RunConfig, engine: ExportEngine):
    theta = config.pump.polarization_theta
    state = polarization.pair_state_from_pump(theta)
    fidelities = polarization.bell_fidelities(state)
    axes = polarization.AXES
    summary = {
        "theta_rad": theta,
        "basis": list(polarization.BASIS_ORDER),
        "amplitudes": [complex(a) for a in state.amplitudes],
        "bell_fidelities": fidelities,
        "axes": {"H": axes.H, "V": axes.V, "theta_reference": axes.theta_reference},
    }
    lines = [f"Pump angle {theta:.6f} rad from the {axes.theta_reference}",
             f"  H = {axes.H}, V = {axes.V}"]
    lines += [f"  {label}: {complex(a).real:+.6f}{complex(a).imag:+.6f}i"
              for label, a in zip(polarization.BASIS_ORDER, state.amplitudes)]
    lines += [f"  F({name}) = {value:.6f}" for name, value in fidelities.items()]
    return summary, "\n".join(lines)


def cmd_shg(args, config: RunConfig, engine: ExportEngine):
    thetas = np.linspace(0.0, 2.0 * np.pi, args.points, endpoint=False)
    parallel, perpendicular = polarization.shg_pattern(thetas)
    path = engine.write_csv(
        [{"theta_rad": t, "parallel": p, "perpendicular": q} for t, p, q in zip(thetas, parallel, perpendicular)],
        "shg.csv", ["theta_rad", "parallel", "perpendicular"])
    summary = {"points": args.points, "files": {"shg": str(path)}}
    return summary, f"SHG polarization pattern ({args.points} angles) written to {path}"


# ============================================================================
# PARSER
# ============================================================================

COMMANDS: Dict[str, Dict[str, Any]] = {
    "spectrum": {"handler": cmd_spectrum, "help": "Frequency-angular emission spectrum",
                 "sections": ["dispersion_path", "film", "pump", "windows", "grids"]},
    "profile": {"handler": cmd_profile, "help": "Signal/idler angular emission profiles",
                "sections": ["dispersion_path", "film", "pump", "windows", "grids"]},
    "scenarios": {"handler": cmd_scenarios, "help": "Forward/backward scenario rates and counter-to-co ratio",
                  "sections": ["dispersion_path", "film", "pump", "windows", "grids"]},
    "bandwidth": {"handler": cmd_bandwidth, "help": "Emission spectrum FWHM and correlation time",
                  "sections": ["dispersion_path", "film", "pump", "windows", "grids"]},
    "coherence": {"handler": cmd_coherence, "help": "Coherence length for one or more pump wavelengths",
                  "sections": ["dispersion_path", "film", "pump"]},
    "simulate": {"handler": cmd_simulate, "help": "Monte Carlo time tags and pump-power sweep",
                 "sections": ["pump", "simulation"]},
    "g2": {"handler": cmd_g2, "help": "Coincidence histogram and g2(tau)",
           "sections": ["pump", "simulation"]},
    "tomo": {"handler": cmd_tomo, "help": "Two-qubit state tomography (MLE)",
             "sections": ["pump", "simulation", "tomography"]},
    "state": {"handler": cmd_state, "help": "Pair polarization state for a pump angle",
              "sections": ["pump"]},
    "shg": {"handler": cmd_shg, "help": "Polarization-resolved SHG pattern", "sections": []},
}


def _epilog(sections: List[str]) -> str:
    if not sections:
        return "Reads no config keys."
    return "Config keys read:\n" + "\n".join(f"  {key}" for key in config_keys(sections))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: packaged config.json)")
    common.add_argument("--seed", type=int, help="Random seed (overrides simulation.seed)")
    common.add_argument("--json", action="store_true", help="Print a JSON summary on stdout")
    common.add_argument("--out", default="./output", help="Output directory")
    common.add_argument("--verbose", action="store_true", help="Print progress markers on stderr")
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level")
    common.add_argument("--log-file", help="Log file path (optional)")

    parser = argparse.ArgumentParser(description="Thin-film SPDC simulator and analysis toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sub = {}
    for name, entry in COMMANDS.items():
        sub[name] = subparsers.add_parser(name, parents=[common], help=entry["help"], description=entry["help"],
                                          epilog=_epilog(entry["sections"]),
                                          formatter_class=argparse.RawDescriptionHelpFormatter)

    for name in ("spectrum", "profile", "scenarios", "bandwidth", "coherence"):
        sub[name].add_argument("--layer-count", type=int, help="Overrides film.layer_count")
    for name in ("tomo", "state", "simulate", "g2"):
        sub[name].add_argument("--theta", type=float, help="Pump polarization angle in rad (overrides pump.theta_rad)")
    for name in ("simulate", "g2"):
        sub[name].add_argument("--power-mw", type=float, help="Pump power (overrides pump.power_mw)")

    sub["spectrum"].add_argument("--joint", action="store_true", help="Also write the joint rate grid")
    sub["spectrum"].add_argument("--joint-points", type=int, default=32, help="Points per joint-grid axis")
    sub["scenarios"].add_argument("--layers", help="Comma-separated layer counts for the thickness scan")
    sub["bandwidth"].add_argument("--arrangement", default="counter", choices=spdc_model.VALID_ARRANGEMENTS)
    sub["bandwidth"].add_argument("--filter-scan", action="store_true", help="Scan a band-pass filter across the band")
    sub["bandwidth"].add_argument("--filter-width-nm", type=float, default=10.0)
    sub["coherence"].add_argument("--pump-nm", type=float, action="append", help="Pump wavelength (repeatable)")
    sub["simulate"].add_argument("--powers", nargs="?", const="config",
                                 help="Run a power sweep (comma-separated mW; default simulation.powers_mw)")
    sub["simulate"].add_argument("--write-tags", action="store_true", help="Write time_tags.csv")
    sub["tomo"].add_argument("--counts", help="Counts CSV (basis_1,basis_2,counts,seconds); default simulates")
    sub["tomo"].add_argument("--write-counts", action="store_true", help="Write the counts used to counts.csv")
    sub["tomo"].add_argument("--target", help=f"Bell-state target {polarization.BELL_STATE_NAMES}")
    sub["shg"].add_argument("--points", type=int, default=360)
    return parser


def _overrides(args) -> Dict[str, Any]:
    return {
        "simulation.seed": args.seed,
        "film.layer_count": getattr(args, "layer_count", None),
        "pump.theta_rad": getattr(args, "theta", None),
        "pump.power_mw": getattr(args, "power_mw", None),
    }


def _log_seed(args, config: RunConfig):
    if args.command not in SEEDED_COMMANDS or getattr(args, "counts", None):
        return
    origin = "--seed" if args.seed is not None else "simulation.seed"
    logger.info(f"Seed {config.simulation.seed} (from {origin})")


def run(args) -> int:
    """Execute one parsed command and return the exit code."""
    try:
        config = load_run_config(args.config, _overrides(args))
        _log_seed(args, config)
        engine = ExportEngine(output_dir=args.out)
        summary, text = COMMANDS[args.command]["handler"](args, config, engine)
        engine.write_json(summary, f"{args.command}.json")
    except (DomainError, NumericalError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"✗ Error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, FileNotFoundError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"✗ Error: {e}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.json:
        print(json.dumps(to_native(summary), indent=2, sort_keys=True))
    else:
        print(text)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(log_level=args.log_level, log_file=args.log_file)
    logger.info(f"Started {args.command}")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
