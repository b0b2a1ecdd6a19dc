import math

import numpy as np
import pytest

from triplecompton.kinematics import CollisionSetup

MGBR_THETAS = (math.pi / 2, math.pi / 2, math.pi / 2)
MGBR_PHIS = (2 * math.pi / 3, 4 * math.pi / 3, 0.0)
XFEL_THETAS = (math.pi - 1.5e-3,) * 3
XFEL_PHIS = (2 * math.pi / 3, 4 * math.pi / 3, 0.0)


@pytest.fixture(scope="session")
def rest_setup():
    return CollisionSetup.rest_frame(0.662)


@pytest.fixture(scope="session")
def xfel_setup():
    return CollisionSetup.head_on(5000.0, 0.001)


def random_physical_configs(setup, rng, n, omega_lo_frac=0.02,
                            omega_hi_frac=0.45):
    """Rejection-sample physical triple-photon configurations.

    For a relativistic incoming electron, hard photons only live in the
    backscatter cone of opening ~ m/E_i, so angles are drawn there.
    """
    from triplecompton.kinematics import FinalStateConfig, close_final_state

    boosted = setup.e_i_mev / setup.mass > 100.0
    out = []
    wmax = setup.omega_max
    while len(out) < n:
        if boosted:
            deltas = (setup.mass / setup.e_i_mev) * rng.uniform(0.3, 20.0, 3)
            thetas = tuple(math.pi - deltas)
        else:
            thetas = tuple(np.arccos(rng.uniform(-1, 1, 3)))
        phis = tuple(rng.uniform(0, 2 * math.pi, 3))
        w1, w2 = rng.uniform(omega_lo_frac * wmax, omega_hi_frac * wmax, 2)
        cfg = FinalStateConfig(thetas=thetas, phis=phis, omega1=w1, omega2=w2)
        state = close_final_state(setup, cfg)
        if state.physical:
            out.append((cfg, state))
    return out
