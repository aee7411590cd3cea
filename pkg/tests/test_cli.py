"""End-to-end tests of the command-line subcommands."""

import csv
import json

import numpy as np
import pytest

from cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, build_parser, main

BOX_GRIDS = {"omega_points": 32, "theta_points": 720, "theta_per_box": 64, "cone_points": 128, "chunk_size": 8}


def _config(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data))
    return str(path)


def _run_json(capsys, argv):
    code = main(argv + ["--json"])
    captured = capsys.readouterr()
    assert code == EXIT_OK, captured.err
    return json.loads(captured.out)


def test_coherence_json_summary(tmp_path, capsys):
    summary = _run_json(capsys, ["coherence", "--pump-nm", "775", "--pump-nm", "405", "--out", str(tmp_path)])
    lengths = [entry["coherence_length_um"] for entry in summary["coherence"]]
    assert all(length > 0 for length in lengths)
    assert lengths[1] < lengths[0]
    assert summary["dispersion_model"]["range_nm"] == [400.0, 20000.0]
    assert (tmp_path / "coherence.csv").exists()
    assert (tmp_path / "coherence.json").exists()


def test_out_of_range_pump_exits_with_domain_code(tmp_path, capsys):
    code = main(["coherence", "--pump-nm", "300", "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL
    assert "outside valid range" in capsys.readouterr().err


def test_state_for_armchair_pump(tmp_path, capsys):
    summary = _run_json(capsys, ["state", "--theta", "0", "--out", str(tmp_path)])
    assert summary["basis"] == ["HH", "HV", "VH", "VV"]
    assert summary["bell_fidelities"]["Phi-"] == pytest.approx(1.0, abs=1e-12)
    assert summary["axes"]["H"].startswith("zigzag")
    assert summary["axes"]["theta_reference"] == "armchair axis"


def test_state_text_report(tmp_path, capsys):
    assert main(["state", "--theta", "1.5707963267948966", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "F(Psi+) = 1.000000" in out
    assert "H = zigzag (x), V = armchair (y)" in out


def test_missing_counts_file_is_a_validation_error(tmp_path, capsys):
    code = main(["tomo", "--counts", str(tmp_path / "missing.csv"), "--out", str(tmp_path)])
    assert code == EXIT_VALIDATION
    assert "not found" in capsys.readouterr().err


def test_missing_config_file_is_a_validation_error(tmp_path, capsys):
    assert main(["shg", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_invalid_config_names_the_field(tmp_path, capsys):
    config = _config(tmp_path, {"pump": {"waist_m": -1.0}})
    assert main(["state", "--config", config, "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert "pump.waist_m" in capsys.readouterr().err


def test_tomo_writes_counts_that_reproduce_the_result(tmp_path, capsys):
    config = _config(tmp_path, {"tomography": {"mean_total": 2000.0}})
    first = _run_json(capsys, ["tomo", "--config", config, "--seed", "5", "--write-counts",
                               "--target", "Phi-", "--out", str(tmp_path / "sim")])
    assert first["fidelity"] >= 0.97
    counts_path = tmp_path / "sim" / "counts.csv"
    with open(counts_path, newline="") as f:
        assert len(list(csv.DictReader(f))) == 16

    second = _run_json(capsys, ["tomo", "--config", config, "--counts", str(counts_path),
                                "--target", "Phi-", "--out", str(tmp_path / "replay")])
    assert second["fidelity"] == pytest.approx(first["fidelity"], abs=1e-9)
    np.testing.assert_allclose(np.array(second["rho"]), np.array(first["rho"]), atol=1e-9)


def test_tomo_is_deterministic_per_seed(tmp_path, capsys):
    config = _config(tmp_path, {"tomography": {"mean_total": 1000.0, "werner_p": 0.8}})
    argv = ["tomo", "--config", config, "--seed", "11", "--out", str(tmp_path)]
    assert _run_json(capsys, argv) == _run_json(capsys, argv)


def test_shg_writes_pattern(tmp_path, capsys):
    summary = _run_json(capsys, ["shg", "--points", "36", "--out", str(tmp_path)])
    assert summary["points"] == 36
    with open(tmp_path / "shg.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 36
    assert float(rows[0]["parallel"]) == pytest.approx(1.0)


def test_g2_reports_bunching(tmp_path, capsys):
    config = _config(tmp_path, {
        "pump": {"power_mw": 1.0},
        "simulation": {
            "duration_s": 10.0,
            "source": {"pair_rate_per_mw": 500.0, "uncorrelated_background_1": 2e4,
                       "uncorrelated_background_2": 2e4},
        },
    })
    summary = _run_json(capsys, ["g2", "--config", config, "--out", str(tmp_path)])
    assert summary["g2_zero"] > 5.0
    assert summary["g2_zero"] == pytest.approx(summary["g2_zero_analytic"], rel=0.25)
    assert (tmp_path / "histogram.csv").exists()


def test_g2_runs_on_packaged_defaults(tmp_path, capsys):
    summary = _run_json(capsys, ["g2", "--out", str(tmp_path)])
    assert summary["g2_zero"] > 100.0
    assert summary["car"] > 0.0
    assert summary["g2_zero"] == pytest.approx(summary["g2_zero_analytic"], rel=0.25)


NOISELESS = {
    "source": {"uncorrelated_background_1": 0.0, "uncorrelated_background_2": 0.0},
    "detector_1": {"dark_rate": 0.0},
    "detector_2": {"dark_rate": 0.0},
}


def test_g2_without_accidentals_is_a_numerical_error(tmp_path, capsys):
    config = _config(tmp_path, {"simulation": dict(NOISELESS, duration_s=10.0)})
    assert main(["g2", "--config", config, "--out", str(tmp_path)]) == EXIT_NUMERICAL
    assert "extend duration" in capsys.readouterr().err


@pytest.mark.parametrize("extra, expected", [
    ([], "Seed 1 (from simulation.seed)"),
    (["--seed", "7"], "Seed 7 (from --seed)"),
])
def test_simulating_commands_log_their_seed(tmp_path, capsys, extra, expected):
    config = _config(tmp_path, {"simulation": {"duration_s": 1.0}})
    code = main(["simulate", "--config", config, "--out", str(tmp_path), "--log-level", "INFO"] + extra)
    assert code == EXIT_OK
    assert expected in capsys.readouterr().err


def test_malformed_settings_file_exits_with_validation_code(tmp_path, capsys):
    settings_path = tmp_path / "settings.json"
    settings_path.write_text(json.dumps([1, 2]))
    config = _config(tmp_path, {"tomography": {"settings_path": str(settings_path)}})
    assert main(["tomo", "--config", config, "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert "entry 0" in capsys.readouterr().err


def test_simulate_power_sweep(tmp_path, capsys):
    config = _config(tmp_path, {"simulation": {"duration_s": 200.0, "source": {"pair_rate_per_mw": 5.0}}})
    summary = _run_json(capsys, ["simulate", "--config", config, "--powers", "5,10,20", "--out", str(tmp_path)])
    assert [point["power_mw"] for point in summary["power_sweep"]] == [5.0, 10.0, 20.0]
    assert summary["fit"]["slope_hz_per_mw"] == pytest.approx(5.0, rel=0.1)


def test_scenarios_monolayer_ratio(tmp_path, capsys):
    config = _config(tmp_path, {"grids": BOX_GRIDS})
    summary = _run_json(capsys, ["scenarios", "--config", config, "--out", str(tmp_path)])
    assert summary["layer_count"] == 1
    assert summary["ratio"] == pytest.approx(2.0, abs=0.05)
    assert set(summary["rates"]) == {"r_ff", "r_fb", "r_bf", "r_bb"}


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["state", "--help"])
    out = capsys.readouterr().out
    assert "pump.theta_rad" in out
    assert "simulation.seed" not in out
