"""Differential cross sections built from the squared amplitudes.

For n emitted photons the fully differential cross section (energies of the
first n-1 photons plus all n solid angles; the last energy is fixed by
conservation) is

    dsigma = alpha^(n+1) / (2 pi)^(2(n-1)) / m^(2(n-1))
             * (w_1 ... w_n) / (E_f  p_i.k_0) * |M|^2 / |K|
             * Theta(w_n) Theta(E_f - m),

in natural units, converted to barns via (hbar c)^2.  n = 3 is the five-fold
cross section sigma5 (b MeV^-2 sr^-3); n = 1 reduces to the one-photon
angular distribution (b/sr).

Photon energies below the detector threshold zero the result here, so the
integrators always see an already-regularized integrand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import amplitude as amp
from .algebra import polarization_basis
from .constants import ALPHA, HBARC2_MEV2_BARN
from .kinematics import (CollisionSetup, FinalStateConfig, _close_arrays,
                         close_final_state)


@dataclass(frozen=True)
class Sigma5Point:
    """sigma5 at one fully resolved phase-space point, in b MeV^-2 sr^-3."""

    value: float
    physical: bool
    cfg: FinalStateConfig


def prefactor(n_out: int, mass: float) -> float:
    """Process-order prefactor alpha^(n+1)/(2 pi)^(2(n-1))/m^(2(n-1))."""
    return (ALPHA ** (n_out + 1)
            / (2.0 * math.pi) ** (2 * (n_out - 1))
            / mass ** (2 * (n_out - 1)))


def sigma5(setup: CollisionSetup, cfg: FinalStateConfig,
           threshold_eps: float = 0.0, beam_pol=1) -> Sigma5Point:
    """Five-fold differential cross section at one spin/polarization point."""
    state = close_final_state(setup, cfg)
    if not state.physical:
        return Sigma5Point(0.0, False, cfg)
    omegas = (cfg.omega1, cfg.omega2, state.omega3)
    if any(w < threshold_eps for w in omegas):
        return Sigma5Point(0.0, True, cfg)
    eps0 = _beam_polarization_vector(beam_pol)
    eps_out = [polarization_basis(t, p).get(lab)
               for t, p, lab in zip(cfg.thetas, cfg.phis, cfg.pols)]
    m = amp.total_amplitude(amp.AmplitudeInputs(
        setup, state, (eps0,) + tuple(eps_out), cfg.r_i, cfg.r_f))
    value = (prefactor(3, setup.mass)
             * omegas[0] * omegas[1] * omegas[2]
             / (state.e_f * setup.flux)
             * abs(m) ** 2 / abs(state.K)
             * HBARC2_MEV2_BARN)
    return Sigma5Point(value, True, cfg)


def _beam_polarization_vector(beam_pol):
    from .algebra import LorentzVector
    if isinstance(beam_pol, int):
        basis = polarization_basis(0.0, 0.0)
        return basis.get(beam_pol)
    ex, ey = float(beam_pol[0]), float(beam_pol[1])
    norm = math.hypot(ex, ey)
    return LorentzVector(0.0, ex / norm, ey / norm, 0.0)


def spin_summed_sigma5(setup: CollisionSetup, thetas, phis, omega1, omega2,
                       beam_pol=1, final_pols=(1, 1, 1),
                       threshold_eps: float = 0.0) -> float:
    """(1/2) sum over both electron spins at fixed photon polarizations."""
    value = spin_summed_sigma5_batch(
        setup, np.array([[t] for t in thetas]), np.array([[p] for p in phis]),
        np.array([omega1]), np.array([omega2]), beam_pol, final_pols,
        threshold_eps)
    return float(value[0])


def unpolarized_sigma5(setup: CollisionSetup, thetas, phis, omega1, omega2,
                       threshold_eps: float = 0.0) -> float:
    """(1/4) sum over electron spins, beam basis and final polarizations."""
    value = unpolarized_sigma5_batch(
        setup, np.array([[t] for t in thetas]), np.array([[p] for p in phis]),
        np.array([omega1]), np.array([omega2]), threshold_eps)
    return float(value[0])


# ---------------------------------------------------------------------------
# batched evaluation on arrays of phase-space points

def _tensor_for_points(setup, n_out, thetas, phis, omegas_free):
    """Closure plus amplitude tensor; returns (tensor, omegas, e_f, K,
    physical)."""
    w_last, k_out, p_f, kfac, physical, _ = _close_arrays(
        setup, thetas, phis, omegas_free)
    n_pts = thetas.shape[1]
    k0 = np.zeros((n_pts, 4))
    k0[:, 0] = setup.omega0_mev
    k0[:, 3] = setup.omega0_mev
    ks = np.concatenate([k0[None], k_out], axis=0)
    # amplitude evaluation is only defined on physical points; park the rest
    # at a harmless reference point and zero them afterwards
    if not physical.all():
        safe = _safe_reference_points(setup, ks, p_f, physical)
        ks, p_f = safe
    eps_arrays = [amp.beam_basis_arrays(n_pts)]
    for j in range(n_out):
        eps_arrays.append(amp.outgoing_basis_arrays(thetas[j], phis[j]))
    tensor = amp.amplitude_tensor(setup, ks, p_f, eps_arrays)
    omegas = np.vstack([np.asarray(omegas_free,
                                   float).reshape(n_out - 1, n_pts),
                        w_last[None]])
    return tensor, omegas, p_f[:, 0], kfac, physical


def _safe_reference_points(setup, ks, p_f, physical):
    """Replace unphysical rows by a fixed physical configuration so spinor
    and propagator construction stay well defined; callers zero these rows."""
    bad = ~physical
    ks = ks.copy()
    p_f = p_f.copy()
    w_ref = 0.05 * setup.omega_max
    n_bad = int(bad.sum())
    if setup.e_i_mev / setup.mass > 100.0:
        # hard emission only lives in the backscatter cone
        cone = setup.mass / setup.e_i_mev
        ref_angles = math.pi - cone * np.array([[2.0], [3.0], [4.0]])
    else:
        ref_angles = np.array([[0.7], [1.3], [2.1]])
    thetas = ref_angles[:ks.shape[0] - 1]
    phis = np.array([[0.3], [2.4], [4.5]])[:ks.shape[0] - 1]
    w_free = np.full((ks.shape[0] - 2, 1), w_ref)
    w_last, k_out, p_f_ref, _, ok, _ = _close_arrays(setup, thetas, phis,
                                                     w_free)
    k0 = np.array([setup.omega0_mev, 0.0, 0.0, setup.omega0_mev])
    ks[0, bad] = k0
    for j in range(k_out.shape[0]):
        ks[j + 1, bad] = np.broadcast_to(k_out[j, 0], (n_bad, 4))
    p_f[bad] = np.broadcast_to(p_f_ref[0], (n_bad, 4))
    return ks, p_f


def _differential_from_msq(setup, n_out, msq, omegas, e_f, kfac, physical,
                           threshold_eps):
    above = np.ones_like(e_f, dtype=bool)
    if threshold_eps > 0.0:
        above = (omegas >= threshold_eps).all(axis=0)
    keep = physical & above
    with np.errstate(divide='ignore', invalid='ignore'):
        value = (prefactor(n_out, setup.mass)
                 * omegas.prod(axis=0) / (e_f * setup.flux)
                 * msq / np.abs(kfac)
                 * HBARC2_MEV2_BARN)
    return np.where(keep, value, 0.0)


def unpolarized_sigma5_batch(setup, thetas, phis, omega1, omega2,
                             threshold_eps: float = 0.0) -> np.ndarray:
    """(1/4) sum_{spins, pols} sigma5 on arrays thetas/phis (3, N), omega (N,)."""
    omegas_free = np.stack([np.asarray(omega1, float),
                            np.asarray(omega2, float)])
    tensor, omegas, e_f, kfac, physical = _tensor_for_points(
        setup, 3, thetas, phis, omegas_free)
    msq = 0.25 * (np.abs(tensor) ** 2).reshape(tensor.shape[0],
                                               -1).sum(axis=1)
    return _differential_from_msq(setup, 3, msq, omegas, e_f, kfac, physical,
                                  threshold_eps)


def spin_summed_sigma5_batch(setup, thetas, phis, omega1, omega2, beam_pol,
                             final_pols, threshold_eps: float = 0.0
                             ) -> np.ndarray:
    """(1/2) sum over electron spins at fixed beam and final polarizations."""
    omegas_free = np.stack([np.asarray(omega1, float),
                            np.asarray(omega2, float)])
    tensor, omegas, e_f, kfac, physical = _tensor_for_points(
        setup, 3, thetas, phis, omegas_free)
    beam = amp.contract_beam(tensor, beam_pol)
    i, j, l = (lab - 1 for lab in final_pols)
    fixed = beam[:, i, j, l]                      # (N, r_i, r_f)
    msq = 0.5 * (np.abs(fixed) ** 2).sum(axis=(1, 2))
    return _differential_from_msq(setup, 3, msq, omegas, e_f, kfac, physical,
                                  threshold_eps)


PANEL_ORDER = ("111", "211", "121", "112", "221", "212", "122", "222")
PANEL_LETTERS = "abcdefgh"


def sigma5_panel_grids(setup, thetas, phis, omega1_grid, omega2_grid,
                       beam_pol=1, threshold_eps: float = 0.0):
    """Spin-summed sigma5 on an (omega1, omega2) grid for all eight final
    polarization triples at once.

    Returns (panels, masked): panels maps the label string ("111", "211",
    ...) to an array of shape (len(w1), len(w2)); masked flags cells that are
    unphysical or have any photon below threshold.  One amplitude tensor
    evaluation covers every panel.
    """
    w1g = np.asarray(omega1_grid, float)
    w2g = np.asarray(omega2_grid, float)
    w1m, w2m = np.meshgrid(w1g, w2g, indexing="ij")
    shape = w1m.shape
    th = np.repeat(np.asarray(thetas, float)[:, None], w1m.size, axis=1)
    ph = np.repeat(np.asarray(phis, float)[:, None], w1m.size, axis=1)
    omegas_free = np.stack([w1m.ravel(), w2m.ravel()])
    tensor, omegas, e_f, kfac, physical = _tensor_for_points(
        setup, 3, th, ph, omegas_free)
    beam = amp.contract_beam(tensor, beam_pol)     # (N, 2,2,2, r_i, r_f)
    msq = 0.5 * (np.abs(beam) ** 2).sum(axis=(4, 5))
    above = (omegas >= threshold_eps).all(axis=0) if threshold_eps > 0 \
        else np.ones(w1m.size, bool)
    keep = physical & above
    with np.errstate(divide='ignore', invalid='ignore'):
        kin = (prefactor(3, setup.mass) * omegas.prod(axis=0)
               / (e_f * setup.flux) / np.abs(kfac) * HBARC2_MEV2_BARN)
    kin = np.where(keep, kin, 0.0)
    panels = {}
    for label in PANEL_ORDER:
        i, j, l = (int(c) - 1 for c in label)
        panels[label] = (msq[:, i, j, l] * kin).reshape(shape)
    return panels, (~keep).reshape(shape)


def threshold_boundary(setup, thetas, phis, omega1_grid,
                       threshold_eps: float, omega2_max: float,
                       scan_points: int = 512):
    """Points (omega1, omega2) where the derived photon energy equals the
    threshold on the physical branch.

    The closure has an unphysical continuation (E_f < m) on which the derived
    energy turns positive again, so for each omega1 the physical branch is
    scanned first and the crossing bracketed there before bisecting."""
    from .kinematics import close_batch

    th = np.asarray(thetas, float)[:, None]
    ph = np.asarray(phis, float)[:, None]

    def closure(w1, w2_arr):
        w2_arr = np.asarray(w2_arr, float)
        n = w2_arr.size
        w3, _, _, _, physical, _ = close_batch(
            setup, np.repeat(th, n, axis=1), np.repeat(ph, n, axis=1),
            np.full(n, w1), w2_arr)
        return w3, physical

    pts = []
    for w1 in np.asarray(omega1_grid, float):
        w2_scan = np.linspace(1e-9, float(omega2_max), scan_points)
        w3, physical = closure(w1, w2_scan)
        above = physical & (w3 >= threshold_eps)
        crossings = np.nonzero(above[:-1] & physical[1:]
                               & (w3[1:] < threshold_eps))[0]
        if crossings.size == 0:
            continue
        lo, hi = w2_scan[crossings[0]], w2_scan[crossings[0] + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            w3_mid, phys_mid = closure(w1, [mid])
            if phys_mid[0] and w3_mid[0] >= threshold_eps:
                lo = mid
            else:
                hi = mid
        pts.append((w1, 0.5 * (lo + hi)))
    return pts


def unpolarized_differential_batch(setup, n_out, thetas, phis, omegas_free,
                                   threshold_eps: float = 0.0) -> np.ndarray:
    """Unpolarized differential cross section for n_out emitted photons.

    Units: b sr^-n_out MeV^-(n_out-1).  Used by the total-cross-section
    integrators for the one-, two- and three-photon processes.
    """
    thetas = np.atleast_2d(thetas)
    phis = np.atleast_2d(phis)
    if n_out == 1:
        omegas_free = np.zeros((0, thetas.shape[1]))
    tensor, omegas, e_f, kfac, physical = _tensor_for_points(
        setup, n_out, thetas, phis, omegas_free)
    msq = 0.25 * (np.abs(tensor) ** 2).reshape(tensor.shape[0],
                                               -1).sum(axis=1)
    return _differential_from_msq(setup, n_out, msq, omegas, e_f, kfac,
                                  physical, threshold_eps)
