#!/usr/bin/env python3
"""Reproduce the detector-averaged triple-photon cross section of the 1968
rest-frame coincidence geometry at full budget."""
import sys

from triplecompton.cli import main

if __name__ == "__main__":
    sys.exit(main(["mgbr1968", "--budget", str(1 << 20),
                   "--seed", "20120", "--out", "out/mgbr1968"]))
