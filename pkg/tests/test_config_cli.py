import math
from pathlib import Path

import numpy as np
import pytest

from triplecompton import cli
from triplecompton.config import (ConfigError, ScenarioConfig,
                                  config_lines, parse_config_file,
                                  resolve_config)
from triplecompton.constants import ELECTRON_MASS_MEV as M


def test_scenario_defaults():
    cfg = resolve_config("mgbr1968")
    assert cfg.e_i_mev == M
    assert cfg.omega0_mev == 0.662
    assert cfg.threshold_mev == 0.013
    assert cfg.solid_angle_sr == 0.378
    xfel = resolve_config("xfel")
    assert xfel.e_i_mev == 5000.0
    assert xfel.omega0_mev == 0.001
    assert xfel.threshold_mev == 50.0
    assert xfel.theta_rad[0] == pytest.approx(math.pi - 1.5e-3)


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("""
# comment line
scenario = xfel
omega0_mev = 0.002   # inline comment
grid.n_omega1 = 7
beams.transverse_size_um = 25
theta_rad = 3.0, 3.1, 3.05
""")
    values = parse_config_file(path)
    cfg = resolve_config(None, values, {})
    assert cfg.scenario == "xfel"
    assert cfg.omega0_mev == 0.002
    assert cfg.grid_n_omega1 == 7
    assert cfg.beams_transverse_size_um == 25.0
    assert cfg.theta_rad == (3.0, 3.1, 3.05)


def test_flag_overrides_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("seed = 5\nbudget = 4096\n")
    cfg = resolve_config("mgbr1968", parse_config_file(path),
                         {"seed": 9, "budget": None})
    assert cfg.seed == 9
    assert cfg.budget == 4096


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("omega_zero = 0.5\n")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_file(path)


def test_validation_messages():
    with pytest.raises(ConfigError, match="solid_angle_sr"):
        resolve_config("mgbr1968", {"solid_angle_sr": "0"}, {})
    with pytest.raises(ConfigError, match="threshold_mev"):
        resolve_config("mgbr1968", {"threshold_mev": "-1"}, {})
    with pytest.raises(ConfigError, match="theta_rad"):
        resolve_config("mgbr1968", {"theta_rad": "0.5, 0.5"}, {})
    with pytest.raises(ConfigError, match="beam_polarization"):
        resolve_config("mgbr1968", {"beam_polarization": "diag"}, {})
    with pytest.raises(ConfigError, match="scenario"):
        resolve_config("nope")


def test_config_lines_roundtrip():
    cfg = resolve_config("xfel")
    lines = config_lines(cfg)
    assert any(line.startswith("grid.n_omega1 = ") for line in lines)
    assert lines == sorted(lines)


def test_cli_invalid_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("solid_angle_sr = 0\n")
    code = cli.main(["mgbr1968", "--config", str(bad),
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CONFIG
    assert "solid_angle_sr" in capsys.readouterr().err


def test_cli_missing_config_file(tmp_path, capsys):
    code = cli.main(["mgbr1968", "--config", str(tmp_path / "none.cfg"),
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CONFIG


def test_cli_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    from triplecompton.integration import BudgetError

    def boom(*args, **kwargs):
        raise BudgetError("budget too small for requested precision")

    monkeypatch.setattr(cli, "detector_average", boom)
    code = cli.main(["mgbr1968", "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_cli_mgbr_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        code = cli.main(["mgbr1968", "--budget", "2048", "--seed", "7",
                         "--out", str(out)])
        assert code == cli.EXIT_OK
    for name in ("report.txt", "metadata.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    report = (out1 / "report.txt").read_text()
    assert "4.1e-09" in report
    assert "8.1" in report and "2.4" in report
    assert "standard deviations" in report


def test_cli_grid_single_cell_matches_library(tmp_path, xfel_setup):
    cfg = tmp_path / "one.cfg"
    cfg.write_text("""
scenario = xfel
grid.omega1_min_mev = 700
grid.omega1_max_mev = 700
grid.n_omega1 = 1
grid.omega2_min_mev = 400
grid.omega2_max_mev = 400
grid.n_omega2 = 1
""")
    out = tmp_path / "out"
    assert cli.main(["grid", "--config", str(cfg),
                     "--out", str(out)]) == cli.EXIT_OK
    from triplecompton.cross_section import spin_summed_sigma5
    from conftest import XFEL_PHIS, XFEL_THETAS

    line = (out / "sigma5_panel_a_111.dat").read_text().splitlines()[1]
    w1, w2, value, masked = line.split("\t")
    assert float(w1) == 700.0 and float(w2) == 400.0 and masked == "0"
    expected = spin_summed_sigma5(xfel_setup, XFEL_THETAS, XFEL_PHIS,
                                  700.0, 400.0, beam_pol=1,
                                  final_pols=(1, 1, 1), threshold_eps=50.0)
    assert float(value) == pytest.approx(expected, rel=1e-9)

    out_tau = tmp_path / "out_tau"
    assert cli.main(["grid", "--observable", "tau", "--config", str(cfg),
                     "--out", str(out_tau)]) == cli.EXIT_OK
    line = (out_tau / "tau_grid.dat").read_text().splitlines()[1]
    tau_value = float(line.split("\t")[2])
    from triplecompton.entanglement import density_from_amplitudes, gme_tau

    rho = density_from_amplitudes(xfel_setup, XFEL_THETAS, XFEL_PHIS,
                                  700.0, 400.0, 1)
    assert tau_value == pytest.approx(gme_tau(rho).tau, abs=1e-6)


def test_cli_grid_outputs_roundtrip(tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("""
scenario = xfel
grid.n_omega1 = 4
grid.n_omega2 = 4
grid.omega1_max_mev = 1300
grid.omega2_max_mev = 1300
""")
    out1, out2 = tmp_path / "g1", tmp_path / "g2"
    for out in (out1, out2):
        assert cli.main(["grid", "--config", str(cfg), "--seed", "3",
                         "--out", str(out)]) == cli.EXIT_OK
    names = sorted(p.name for p in out1.iterdir())
    assert len([n for n in names if n.startswith("sigma5_panel_")]) == 8
    assert "threshold_boundary.dat" in names
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    # re-reading and re-emitting a grid file is byte-identical
    table = (out1 / "sigma5_panel_a_111.dat").read_text()
    rows = [line.split("\t") for line in table.splitlines()[1:]]
    rebuilt = "omega1_mev\tomega2_mev\tsigma5_b_mev2_sr3\tmasked\n" + "\n".join(
        "\t".join((f"{float(r[0]):.10e}", f"{float(r[1]):.10e}",
                   f"{float(r[2]):.10e}", str(int(r[3])))) for r in rows) + "\n"
    assert rebuilt == table


def test_cli_totals_report(tmp_path):
    out = tmp_path / "totals"
    code = cli.main(["totals", "--process", "single", "--budget", "4096",
                     "--seed", "2", "--out", str(out)])
    assert code == cli.EXIT_OK
    text = (out / "totals.txt").read_text()
    assert "sigma_single" in text and "rate" in text
    meta = (out / "metadata.txt").read_text()
    assert "n_samples_single = 4096" in meta


def test_cli_scan_rows(tmp_path):
    cfg = tmp_path / "scan.cfg"
    cfg.write_text("""
scan.omega0_min_mev = 0.4
scan.omega0_max_mev = 1.0
scan.n_points = 3
""")
    out = tmp_path / "scan"
    code = cli.main(["scan", "--config", str(cfg), "--budget", "2048",
                     "--seed", "5", "--out", str(out)])
    assert code == cli.EXIT_OK
    rows = (out / "scan.dat").read_text().splitlines()
    assert rows[0] == "omega0_mev\tavg_sigma_b_sr3\tstat_error_b_sr3"
    assert len(rows) == 4


def test_cli_scan_single_point_degenerates_to_average(tmp_path):
    cfg = tmp_path / "scan1.cfg"
    cfg.write_text("""
scan.omega0_min_mev = 0.662
scan.omega0_max_mev = 0.662
scan.n_points = 1
""")
    out = tmp_path / "scan1"
    assert cli.main(["scan", "--config", str(cfg), "--budget", "2048",
                     "--seed", "7", "--out", str(out)]) == cli.EXIT_OK
    row = (out / "scan.dat").read_text().splitlines()[1].split("\t")
    out2 = tmp_path / "avg"
    assert cli.main(["mgbr1968", "--budget", "2048", "--seed", "7",
                     "--out", str(out2)]) == cli.EXIT_OK
    report = (out2 / "report.txt").read_text()
    assert f"{float(row[1]):.6e}" in report
