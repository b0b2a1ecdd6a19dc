"""Physical constants and unit conversions.

All internal energies are in MeV and natural units (hbar = c = 1) are used,
so cross sections come out in MeV^-2 and are converted to barns at the end.
"""

ELECTRON_MASS_MEV = 0.510998950

ALPHA = 1.0 / 137.036

# (hbar*c)^2 in GeV^2 * mbarn (CODATA); the MeV^2 * barn value follows from
# 1 GeV^2 = 1e6 MeV^2 and 1 mb = 1e-3 b.
HBARC2_GEV2_MBARN = 0.3893793721
HBARC2_MEV2_BARN = HBARC2_GEV2_MBARN * 1e6 * 1e-3

BARN_TO_CM2 = 1e-24
