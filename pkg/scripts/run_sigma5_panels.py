#!/usr/bin/env python3
"""Polarization-resolved sigma5 maps over (omega1, omega2) in the collider
geometry: eight panels (one per final polarization triple, x-polarized beam)
plus the curve where the derived photon energy sits at threshold."""
import pathlib
import sys
import tempfile

from triplecompton.cli import main

CONFIG = """
scenario = xfel
grid.n_omega1 = 60
grid.n_omega2 = 60
grid.omega1_min_mev = 50
grid.omega1_max_mev = 1400
grid.omega2_min_mev = 50
grid.omega2_max_mev = 1400
"""

if __name__ == "__main__":
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(CONFIG)
        path = fh.name
    code = main(["grid", "--observable", "sigma5", "--config", path,
                 "--out", "out/panels"])
    pathlib.Path(path).unlink()
    sys.exit(code)
