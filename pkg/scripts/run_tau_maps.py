#!/usr/bin/env python3
"""Entanglement-measure maps over (omega1, omega2) for both scenarios.

The rest-frame run places the three detectors at theta = pi/2 - 1 rad (the
literal reading of that geometry; pass a config to override), the collider
run at theta = pi - 1.5e-3.  Each unmasked cell costs one witness
optimization, so grids are kept moderate by default.
"""
import pathlib
import sys
import tempfile

from triplecompton.cli import main

REST = """
scenario = mgbr1968
theta_rad = 0.5707963267948966, 0.5707963267948966, 0.5707963267948966
grid.n_omega1 = 20
grid.n_omega2 = 20
grid.omega1_min_mev = 0.013
grid.omega1_max_mev = 0.60
grid.omega2_min_mev = 0.013
grid.omega2_max_mev = 0.60
"""

XFEL = """
scenario = xfel
grid.n_omega1 = 20
grid.n_omega2 = 20
grid.omega1_min_mev = 55
grid.omega1_max_mev = 1350
grid.omega2_min_mev = 55
grid.omega2_max_mev = 1350
"""

if __name__ == "__main__":
    code = 0
    for name, text in (("rest", REST), ("xfel", XFEL)):
        with tempfile.NamedTemporaryFile("w", suffix=".cfg",
                                         delete=False) as fh:
            fh.write(text)
            path = fh.name
        code = code or main(["grid", "--observable", "tau", "--config", path,
                             "--out", f"out/tau_{name}"])
        pathlib.Path(path).unlink()
    sys.exit(code)
