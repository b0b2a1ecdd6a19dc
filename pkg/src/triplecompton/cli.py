"""Command-line front end: batch scenario runs with reproducible outputs.

Subcommands
    mgbr1968  detector-averaged cross section in the rest-frame coincidence
              geometry, with the reference theory/experiment lines
    grid      (omega1, omega2) maps of sigma5 (eight polarization panels)
              or of the entanglement measure tau
    totals    total cross sections for the one-, two- and three-photon
              processes plus beam-collision event rates
    scan      detector average versus incoming photon energy on a log grid

Every run writes a metadata record (resolved config, seed, budget, code
version) next to its outputs; rerunning with the same seed, budget and config
reproduces every output file byte for byte.

Exit codes: 0 success, 2 config validation failure, 3 numerical
non-convergence or insufficient sampling budget.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, config_lines, \
    parse_config_file, resolve_config
from .cross_section import (PANEL_LETTERS, PANEL_ORDER, sigma5_panel_grids,
                            threshold_boundary)
from .entanglement import SolverError, tau_grid
from .integration import (BeamParameters, BudgetError, WindowError,
                          detector_average, event_rate, total_cross_section)
from .kinematics import CollisionSetup

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# Published reference values, rendered in reports only, never used in any
# computation: the detector-averaged theory/measurement pair for the
# historical rest-frame coincidence experiment.
REFERENCE_THEORY_B_SR3 = 4.1e-9
REFERENCE_EXPERIMENT_B_SR3 = (8.1e-9, 2.4e-9)


def _setup_from_config(cfg: ScenarioConfig) -> CollisionSetup:
    return CollisionSetup(cfg.e_i_mev, cfg.omega0_mev)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def _metadata(cfg: ScenarioConfig, command: str, extra=()) -> str:
    lines = [f"command = {command}", f"version = {__version__}"]
    lines += config_lines(cfg)
    lines += list(extra)
    return "\n".join(lines) + "\n"


def _grid_axis(lo: float, hi: float, n: int) -> np.ndarray:
    if n == 1:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def run_mgbr1968(cfg: ScenarioConfig, out_dir: Path) -> str:
    setup = _setup_from_config(cfg)
    res = detector_average(setup, cfg.theta_rad, cfg.phi_rad,
                           cfg.solid_angle_sr, cfg.threshold_mev,
                           budget=cfg.budget, seed=cfg.seed)
    exp_val, exp_err = REFERENCE_EXPERIMENT_B_SR3
    pull = (exp_val - res.value) / exp_err
    lines = [
        "detector-averaged cross section",
        f"  omega0 = {cfg.omega0_mev:.6g} MeV on an electron at rest",
        f"  windows: Omega = {cfg.solid_angle_sr:.6g} sr per detector, "
        f"threshold = {cfg.threshold_mev * 1e3:.6g} keV",
        f"  <sigma> = {res.value:.6e} +- {res.statistical_error:.2e} b/sr^3"
        f"   (n = {res.n_samples}, seed = {res.seed})",
        f"  reference theory:     {REFERENCE_THEORY_B_SR3:.1e} b/sr^3",
        f"  reference experiment: ({exp_val * 1e9:.1f} +- {exp_err * 1e9:.1f})"
        "e-09 b/sr^3",
        f"  experiment - this run: {pull:.2f} experimental standard "
        "deviations",
    ]
    report = "\n".join(lines) + "\n"
    _write(out_dir / "report.txt", report)
    _write(out_dir / "metadata.txt",
           _metadata(cfg, "mgbr1968", [f"n_samples = {res.n_samples}"]))
    return report


def _grid_table(w1s, w2s, values, masked, value_name: str) -> str:
    rows = [f"omega1_mev\tomega2_mev\t{value_name}\tmasked"]
    for i, w1 in enumerate(w1s):
        for j, w2 in enumerate(w2s):
            rows.append(f"{w1:.10e}\t{w2:.10e}\t{values[i, j]:.10e}"
                        f"\t{int(masked[i, j])}")
    return "\n".join(rows) + "\n"


def run_grid(cfg: ScenarioConfig, observable: str, out_dir: Path) -> str:
    setup = _setup_from_config(cfg)
    w1s = _grid_axis(cfg.grid_omega1_min_mev, cfg.grid_omega1_max_mev,
                     cfg.grid_n_omega1)
    w2s = _grid_axis(cfg.grid_omega2_min_mev, cfg.grid_omega2_max_mev,
                     cfg.grid_n_omega2)
    beam = cfg.beam_pol_value()
    written = []
    if observable == "sigma5":
        panels, masked = sigma5_panel_grids(
            setup, cfg.theta_rad, cfg.phi_rad, w1s, w2s, beam,
            cfg.threshold_mev)
        for letter, label in zip(PANEL_LETTERS, PANEL_ORDER):
            name = f"sigma5_panel_{letter}_{label}.dat"
            _write(out_dir / name,
                   _grid_table(w1s, w2s, panels[label], masked,
                               "sigma5_b_mev2_sr3"))
            written.append(name)
        boundary = threshold_boundary(
            setup, cfg.theta_rad, cfg.phi_rad, w1s, cfg.threshold_mev,
            omega2_max=setup.omega_max)
        rows = ["omega1_mev\tomega2_mev"]
        rows += [f"{a:.10e}\t{b:.10e}" for a, b in boundary]
        _write(out_dir / "threshold_boundary.dat", "\n".join(rows) + "\n")
        written.append("threshold_boundary.dat")
    else:
        taus, masked = tau_grid(setup, cfg.theta_rad, cfg.phi_rad, w1s, w2s,
                                beam, cfg.threshold_mev)
        _write(out_dir / "tau_grid.dat",
               _grid_table(w1s, w2s, taus, masked, "tau"))
        written.append("tau_grid.dat")
    _write(out_dir / "metadata.txt",
           _metadata(cfg, f"grid {observable}",
                     [f"files = {', '.join(written)}"]))
    return f"wrote {len(written)} file(s) to {out_dir}\n"


def run_totals(cfg: ScenarioConfig, processes, out_dir: Path) -> str:
    setup = _setup_from_config(cfg)
    beams = BeamParameters(cfg.beams_photons_per_pulse,
                           cfg.beams_electrons_per_bunch,
                           cfg.beams_transverse_size_um,
                           cfg.beams_repetition_rate_hz)
    lines = ["total cross sections",
             f"  E_i = {cfg.e_i_mev:.6g} MeV, omega0 = {cfg.omega0_mev:.6g} "
             f"MeV, threshold = {cfg.threshold_mev:.6g} MeV"]
    results = {}
    for process in processes:
        res = total_cross_section(setup, cfg.threshold_mev, process,
                                  budget=cfg.budget, seed=cfg.seed)
        results[process] = res
        rate = event_rate(res.value, beams)
        lines.append(
            f"  sigma_{process:<6s} = {res.value:.6e} +- "
            f"{res.statistical_error:.2e} b   rate = {rate:.3e} /s")
    lines.append(
        f"  beams: {beams.photons_per_pulse:.3g} photons/pulse, "
        f"{beams.electrons_per_bunch:.3g} electrons/bunch, "
        f"d = {beams.transverse_size_um:.3g} um, "
        f"{beams.repetition_rate_hz:.3g} Hz")
    report = "\n".join(lines) + "\n"
    _write(out_dir / "totals.txt", report)
    _write(out_dir / "metadata.txt",
           _metadata(cfg, "totals " + ",".join(processes),
                     [f"n_samples_{p} = {r.n_samples}"
                      for p, r in results.items()]))
    return report


def run_scan(cfg: ScenarioConfig, out_dir: Path) -> str:
    if cfg.scan_n_points == 1:
        omega0s = np.array([cfg.scan_omega0_min_mev])
    else:
        omega0s = np.geomspace(cfg.scan_omega0_min_mev,
                               cfg.scan_omega0_max_mev, cfg.scan_n_points)
    rows = ["omega0_mev\tavg_sigma_b_sr3\tstat_error_b_sr3"]
    for w0 in omega0s:
        setup = CollisionSetup(cfg.e_i_mev, float(w0))
        res = detector_average(setup, cfg.theta_rad, cfg.phi_rad,
                               cfg.solid_angle_sr, cfg.threshold_mev,
                               budget=cfg.budget, seed=cfg.seed)
        rows.append(f"{w0:.10e}\t{res.value:.10e}"
                    f"\t{res.statistical_error:.10e}")
    table = "\n".join(rows) + "\n"
    _write(out_dir / "scan.dat", table)
    _write(out_dir / "metadata.txt",
           _metadata(cfg, "scan", [f"rows = {len(omega0s)}"]))
    return table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triplecompton",
        description="Multi-photon Compton cross sections and photon-triplet "
                    "entanglement")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="key = value config file")
        p.add_argument("--scenario", choices=("mgbr1968", "xfel", "custom"),
                       default=None, help="named defaults to start from")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--budget", type=int, default=None,
                       help="Monte Carlo sample budget")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory")

    common(sub.add_parser("mgbr1968",
                          help="rest-frame detector-averaged cross section"))
    g = sub.add_parser("grid", help="emit (omega1, omega2) grids")
    common(g)
    g.add_argument("--observable", choices=("sigma5", "tau"),
                   default="sigma5")
    t = sub.add_parser("totals", help="total cross sections and event rates")
    common(t)
    t.add_argument("--process", choices=("single", "double", "triple"),
                   action="append", default=None,
                   help="repeatable; default: all three")
    common(sub.add_parser("scan", help="detector average vs omega0"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        overrides = {"seed": args.seed, "budget": args.budget}
        default_scenario = "xfel" if args.command == "totals" else None
        cfg = resolve_config(args.scenario or (None if file_values.get(
            "scenario") else default_scenario), file_values, overrides)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "mgbr1968":
            report = run_mgbr1968(cfg, args.out)
        elif args.command == "grid":
            report = run_grid(cfg, args.observable, args.out)
        elif args.command == "totals":
            processes = args.process or ["single", "double", "triple"]
            report = run_totals(cfg, processes, args.out)
        else:
            report = run_scan(cfg, args.out)
    except (BudgetError, SolverError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (WindowError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(report, end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
