#!/usr/bin/env python3
"""Total cross sections for one, two and three emitted photons in the
backscattering collider setup (5 GeV electrons vs 1 keV photons, 50 MeV
detection threshold), plus event-rate estimates for typical pulse trains."""
import sys

from triplecompton.cli import main

if __name__ == "__main__":
    sys.exit(main(["totals", "--scenario", "xfel", "--budget", str(1 << 19),
                   "--seed", "7", "--out", "out/xfel_totals"]))
