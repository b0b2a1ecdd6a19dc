import itertools
import math

import numpy as np
import pytest

from triplecompton import algebra as al
from triplecompton import amplitude as am
from triplecompton.constants import ELECTRON_MASS_MEV as M
from triplecompton.kinematics import (CollisionSetup, FinalStateConfig,
                                      _close_arrays, close_final_state)
from conftest import MGBR_PHIS, MGBR_THETAS, random_physical_configs


def _inputs(setup, cfg, state, beam_label=1):
    eps0 = al.polarization_basis(0.0, 0.0).get(beam_label)
    eps = [eps0] + [al.polarization_basis(t, p).get(lab)
                    for t, p, lab in zip(cfg.thetas, cfg.phis, cfg.pols)]
    return am.AmplitudeInputs(setup, state, tuple(eps), cfg.r_i, cfg.r_f)


@pytest.fixture(scope="module")
def sample_point(rest_setup):
    cfg = FinalStateConfig(thetas=(1.2, 2.0, 0.9), phis=(0.4, 2.5, 4.4),
                           omega1=0.1, omega2=0.15)
    return cfg, close_final_state(rest_setup, cfg)


def test_permutation_count():
    assert len(am.PERMUTATIONS4) == 24
    assert len(set(am.PERMUTATIONS4)) == 24


def test_propagator_momenta_identity_order(rest_setup, sample_point):
    cfg, state = sample_point
    inputs = _inputs(rest_setup, cfg, state)
    q1, q2, q3 = am.propagator_momenta((0, 1, 2, 3), inputs)
    p_i, k0 = rest_setup.p_i, rest_setup.k_0
    assert np.allclose(q1.as_array(), (p_i + k0).as_array())
    assert np.allclose(q2.as_array(), (p_i + k0 - state.k1).as_array())
    assert np.allclose(q3.as_array(),
                       (p_i + k0 - state.k1 - state.k2).as_array())


def test_propagator_momenta_emission_first(rest_setup, sample_point):
    cfg, state = sample_point
    inputs = _inputs(rest_setup, cfg, state)
    q1, _, _ = am.propagator_momenta((1, 0, 2, 3), inputs)
    assert np.allclose(q1.as_array(),
                       (rest_setup.p_i - state.k1).as_array())


def test_momentum_closure_every_permutation(rest_setup, sample_point):
    cfg, state = sample_point
    inputs = _inputs(rest_setup, cfg, state)
    ks = inputs.photons
    for xi in am.PERMUTATIONS4:
        q3 = am.propagator_momenta(xi, inputs)[2]
        last = ks[xi[3]]
        q4 = q3 + last if xi[3] == 0 else q3 - last
        assert np.abs((q4 - state.p_f).as_array()).max() < 1e-12


def _max_basis_amplitude(setup, cfg, state):
    best = 0.0
    for labels in itertools.product((1, 2), repeat=4):
        eps0 = al.polarization_basis(0.0, 0.0).get(labels[0])
        eps = [eps0] + [al.polarization_basis(t, p).get(lab)
                        for t, p, lab in zip(cfg.thetas, cfg.phis,
                                             labels[1:])]
        amp = am.total_amplitude(am.AmplitudeInputs(
            setup, state, tuple(eps), cfg.r_i, cfg.r_f))
        best = max(best, abs(amp))
    return best


def test_ward_identity(rest_setup):
    rng = np.random.default_rng(21)
    for cfg, state in random_physical_configs(rest_setup, rng, 5):
        base = _inputs(rest_setup, cfg, state)
        scale = _max_basis_amplitude(rest_setup, cfg, state)
        ks = base.photons
        for j in range(4):
            eps = list(base.eps)
            eps[j] = ks[j]
            amp = am.total_amplitude(am.AmplitudeInputs(
                rest_setup, state, tuple(eps), cfg.r_i, cfg.r_f))
            assert abs(amp) <= 1e-9 * scale


def test_bose_symmetry_full_permutations(rest_setup):
    rng = np.random.default_rng(22)
    cfg, state = random_physical_configs(rest_setup, rng, 1)[0]
    outgoing = [(state.k1, cfg.thetas[0], cfg.phis[0], 1),
                (state.k2, cfg.thetas[1], cfg.phis[1], 2),
                (state.k3, cfg.thetas[2], cfg.phis[2], 1)]
    eps0 = al.polarization_basis(0.0, 0.0).get(1)

    def amp_for(order):
        eps = [eps0] + [al.polarization_basis(t, p).get(lab)
                        for _, t, p, lab in order]
        ks = tuple(k for k, *_ in order)
        # rebuild the inputs with photons permuted coherently
        state_perm = type(state)(ks[0], ks[1], ks[2], state.p_f,
                                 state.omega3, state.K, state.physical)
        return am.total_amplitude(am.AmplitudeInputs(
            rest_setup, state_perm, tuple(eps), cfg.r_i, cfg.r_f))

    reference = None
    for order in itertools.permutations(outgoing):
        amp = amp_for(list(order))
        if reference is None:
            reference = amp
        assert amp == pytest.approx(reference, rel=1e-12)


def test_dual_path_agreement(rest_setup, xfel_setup):
    rng = np.random.default_rng(23)
    # benign kinematics: the two strategies agree at double precision
    for cfg, state in random_physical_configs(rest_setup, rng, 4):
        inputs = _inputs(rest_setup, cfg, state)
        fast = am.total_amplitude(inputs)
        slow = am.naive_total_amplitude(inputs)
        assert fast == pytest.approx(slow, rel=1e-12)
    # backscatter kinematics amplify rounding by the internal cancellation
    # (up to ~1e9); double precision only supports a loose mutual bound here,
    # the strict 1e-12 comparison runs in software precision below
    for cfg, state in random_physical_configs(xfel_setup, rng, 3):
        inputs = _inputs(xfel_setup, cfg, state)
        fast = am.total_amplitude(inputs)
        slow = am.naive_total_amplitude(inputs)
        assert fast == pytest.approx(slow, rel=1e-5)


def test_dual_path_high_precision_backscatter(xfel_setup):
    from _highprec import amplitude_pair

    rng = np.random.default_rng(29)
    for cfg, state in random_physical_configs(xfel_setup, rng, 2):
        fast, slow, w3, e_f, _ = amplitude_pair(
            xfel_setup.e_i_mev, xfel_setup.omega0_mev, cfg.thetas, cfg.phis,
            cfg.omega1, cfg.omega2, cfg.pols, 1, cfg.r_i, cfg.r_f)
        assert abs(complex(fast - slow)) <= 1e-12 * abs(complex(fast))
        # the mp closure is an independent oracle for the float64 one
        assert float(w3) == pytest.approx(state.omega3, rel=1e-9)
        assert float(e_f) == pytest.approx(state.e_f, rel=1e-12)


def test_tensor_path_matches_scalar(rest_setup, sample_point):
    cfg, state = sample_point
    th = np.array([[t] for t in cfg.thetas])
    ph = np.array([[p] for p in cfg.phis])
    w3, k_out, p_f, K, phys, _ = _close_arrays(
        rest_setup, th, ph, np.array([[cfg.omega1], [cfg.omega2]]))
    k0 = np.array([[0.662, 0, 0, 0.662]])
    ks = np.concatenate([k0[None], k_out], axis=0)
    eps_arrays = [am.beam_basis_arrays(1)] + [
        am.outgoing_basis_arrays(th[j], ph[j]) for j in range(3)]
    tensor = am.amplitude_tensor(rest_setup, ks, p_f, eps_arrays)
    for labels in itertools.product((1, 2), repeat=4):
        for r_i, r_f in itertools.product((1, 2), repeat=2):
            cfg2 = FinalStateConfig(cfg.thetas, cfg.phis, cfg.omega1,
                                    cfg.omega2, labels[1:], r_i, r_f)
            scalar = am.total_amplitude(_inputs(rest_setup, cfg2, state,
                                                labels[0]))
            indexed = tensor[0, labels[0] - 1, labels[1] - 1,
                             labels[2] - 1, labels[3] - 1, r_i - 1, r_f - 1]
            assert indexed == pytest.approx(scalar, rel=1e-12)


def test_squared_sum_is_real_nonnegative(rest_setup, sample_point):
    cfg, state = sample_point
    total = 0.0
    for labels in itertools.product((1, 2), repeat=4):
        for r_i, r_f in itertools.product((1, 2), repeat=2):
            cfg2 = FinalStateConfig(cfg.thetas, cfg.phis, cfg.omega1,
                                    cfg.omega2, labels[1:], r_i, r_f)
            amp = am.total_amplitude(_inputs(rest_setup, cfg2, state,
                                             labels[0]))
            total += abs(amp) ** 2
    assert total > 0.0


def _single_closure(setup, theta, phi):
    w3, k_out, p_f, kfac, phys, _ = _close_arrays(
        setup, np.array([[theta]]), np.array([[phi]]), np.zeros((0, 1)))
    k1 = al.LorentzVector(*k_out[0, 0])
    return k1, al.LorentzVector(*p_f[0]), float(w3[0]), float(kfac[0])


def test_single_compton_gauge(rest_setup):
    k1, p_f, w1, _ = _single_closure(rest_setup, 1.1, 0.7)
    eps_in = al.polarization_basis(0.0, 0.0).get(1)
    amp = am.single_compton_amplitude(rest_setup, k1, p_f, eps_in, k1)
    scale = max(abs(am.single_compton_amplitude(
        rest_setup, k1, p_f, eps_in,
        al.polarization_basis(1.1, 0.7).get(lab))) for lab in (1, 2))
    assert abs(amp) <= 1e-9 * scale
    amp2 = am.single_compton_amplitude(rest_setup, k1, p_f, rest_setup.k_0,
                                       al.polarization_basis(1.1, 0.7).get(1))
    assert abs(amp2) <= 1e-9 * scale


def _double_closure(setup, t1, p1, w1, t2, p2):
    w_last, k_out, p_f, kfac, phys, _ = _close_arrays(
        setup, np.array([[t1], [t2]]), np.array([[p1], [p2]]),
        np.array([[w1]]))
    assert phys[0]
    return (al.LorentzVector(*k_out[0, 0]), al.LorentzVector(*k_out[1, 0]),
            al.LorentzVector(*p_f[0]))


def test_double_compton_gauge_and_bose(rest_setup):
    k1, k2, p_f = _double_closure(rest_setup, 1.0, 0.3, 0.15, 2.0, 2.8)
    eps0 = al.polarization_basis(0.0, 0.0).get(1)
    e1 = al.polarization_basis(1.0, 0.3).get(1)
    e2 = al.polarization_basis(2.0, 2.8).get(2)
    base = am.double_compton_amplitude(rest_setup, k1, k2, p_f,
                                       (eps0, e1, e2))
    swapped = am.double_compton_amplitude(rest_setup, k2, k1, p_f,
                                          (eps0, e2, e1))
    assert swapped == pytest.approx(base, rel=1e-12)
    for j, vec in ((1, k1), (2, k2)):
        eps = [eps0, e1, e2]
        eps[j] = vec
        amp = am.double_compton_amplitude(rest_setup, k1, k2, p_f,
                                          tuple(eps))
        assert abs(amp) <= 1e-9 * abs(base)


def test_contract_beam_linearity(rest_setup, sample_point):
    cfg, state = sample_point
    th = np.array([[t] for t in cfg.thetas])
    ph = np.array([[p] for p in cfg.phis])
    _, k_out, p_f, _, _, _ = _close_arrays(
        rest_setup, th, ph, np.array([[cfg.omega1], [cfg.omega2]]))
    ks = np.concatenate([np.array([[0.662, 0, 0, 0.662]])[None], k_out],
                        axis=0)
    eps_arrays = [am.beam_basis_arrays(1)] + [
        am.outgoing_basis_arrays(th[j], ph[j]) for j in range(3)]
    tensor = am.amplitude_tensor(rest_setup, ks, p_f, eps_arrays)
    mixed = am.contract_beam(tensor, (0.6, 0.8))
    expected = 0.6 * tensor[:, 0] + 0.8 * tensor[:, 1]
    assert np.allclose(mixed, expected, rtol=1e-12)
    with pytest.raises(ValueError):
        am.contract_beam(tensor, (0.0, 0.0))
    with pytest.raises(ValueError):
        am.contract_beam(tensor, 3)
