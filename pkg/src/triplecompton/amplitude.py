"""Invariant amplitudes for one absorbed photon and n emitted photons.

The amplitude is a coherent sum over every insertion order of the photon
lines on the electron line,

    M = m^n  sum_xi  ubar(p_f) eslash_xi(n) S(q_n) ... S(q_1) eslash_xi(0) u(p_i),

with S(q) = (qslash + m)/(q^2 - m^2) and intermediate momenta built by adding
the absorbed photon momentum (index 0) and subtracting emitted ones in the
order given by the permutation xi.  n = 3 gives the photon-splitting process
(24 permutations); n = 2 and n = 1 run on the same machinery (6 and 2
permutations) and feed the two-photon and one-photon cross sections.

Two evaluation strategies are kept deliberately distinct:

* ``total_amplitude`` / the batched ``amplitude_tensor`` chain the operators
  onto the initial spinor right-to-left (matrix-vector) and cache slashed
  polarizations plus every distinct propagator across permutations;
* ``naive_total_amplitude`` multiplies the full 4x4 chains term by term with
  no sharing, as an independent reference path for tests.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import (IDENTITY4, LorentzVector, dirac_spinor,
                      dirac_spinor_bar_batch, dirac_spinor_batch,
                      minkowski_dot, polarization_basis, propagator, slash,
                      slash_batch)
from .kinematics import ClosedFinalState, CollisionSetup

PERMUTATIONS4 = tuple(itertools.permutations(range(4)))

_POL_AXES = "pqstuv"


def photon_sign(index: int) -> int:
    """+1 for the absorbed photon (index 0), -1 for emitted photons."""
    return 1 if index == 0 else -1


@dataclass(frozen=True)
class AmplitudeInputs:
    """Everything a single amplitude evaluation needs.

    eps holds the four polarization four-vectors (absorbed photon first);
    arbitrary four-vectors are accepted there so gauge tests can substitute
    eps -> k.
    """

    setup: CollisionSetup
    state: ClosedFinalState
    eps: tuple
    r_i: int = 1
    r_f: int = 1

    @property
    def photons(self) -> tuple:
        return (self.setup.k_0,) + self.state.photons


def propagator_momenta(xi, inputs: AmplitudeInputs) -> tuple:
    """Intermediate electron momenta (q_1, q_2, q_3) for insertion order xi."""
    ks = inputs.photons
    qs = []
    q = inputs.setup.p_i
    for j in xi[:-1]:
        q = q + ks[j] if j == 0 else q - ks[j]
        qs.append(q)
    return tuple(qs)


def _chain_amplitude(p_i, p_f, photons, eps, r_i, r_f, mass):
    """Right-to-left evaluation with cached slashed-eps and propagators."""
    n = len(photons)
    u_i = dirac_spinor(p_i, r_i, mass).components
    ubar_f = dirac_spinor(p_f, r_f, mass).bar()
    slashed = [slash(e) for e in eps]
    prop_cache = {}
    total = 0.0 + 0.0j
    for xi in itertools.permutations(range(n)):
        v = u_i
        q = p_i
        for step, j in enumerate(xi):
            v = slashed[j] @ v
            if step < n - 1:
                q = q + photons[j] if j == 0 else q - photons[j]
                key = frozenset(xi[:step + 1])
                mat = prop_cache.get(key)
                if mat is None:
                    mat = propagator(q, mass)
                    prop_cache[key] = mat
                v = mat @ v
        total += ubar_f @ v
    return mass ** (n - 1) * total


def total_amplitude(inputs: AmplitudeInputs) -> complex:
    """Full 24-permutation amplitude for the three-photon final state."""
    return _chain_amplitude(inputs.setup.p_i, inputs.state.p_f,
                            inputs.photons, inputs.eps,
                            inputs.r_i, inputs.r_f, inputs.setup.mass)


def naive_total_amplitude(inputs: AmplitudeInputs) -> complex:
    """Reference path: explicit matrix products, one permutation at a time."""
    p_i, p_f = inputs.setup.p_i, inputs.state.p_f
    mass = inputs.setup.mass
    ks = inputs.photons
    n = len(ks)
    u_i = dirac_spinor(p_i, inputs.r_i, mass).components
    ubar_f = dirac_spinor(p_f, inputs.r_f, mass).bar()
    slashed = [slash(e) for e in inputs.eps]
    total = 0.0 + 0.0j
    for xi in itertools.permutations(range(n)):
        # application order: eps_xi(0), S(q_1), eps_xi(1), ..., eps_xi(n-1)
        mats = [slashed[xi[0]]]
        q = p_i
        for step, j in enumerate(xi[:-1]):
            q = q + ks[j] if j == 0 else q - ks[j]
            mats.append(propagator(q, mass))
            mats.append(slashed[xi[step + 1]])
        chain = IDENTITY4
        for mat in mats:
            chain = mat @ chain
        total += ubar_f @ chain @ u_i
    return mass ** (n - 1) * total


def single_compton_amplitude(setup: CollisionSetup, k_out: LorentzVector,
                             p_f: LorentzVector, eps_in: LorentzVector,
                             eps_out: LorentzVector, r_i: int = 1,
                             r_f: int = 1) -> complex:
    """Two-permutation amplitude for one emitted photon."""
    return _chain_amplitude(setup.p_i, p_f, (setup.k_0, k_out),
                            (eps_in, eps_out), r_i, r_f, setup.mass)


def double_compton_amplitude(setup: CollisionSetup, k_1: LorentzVector,
                             k_2: LorentzVector, p_f: LorentzVector,
                             eps: tuple, r_i: int = 1,
                             r_f: int = 1) -> complex:
    """Six-permutation amplitude for two emitted photons; eps holds the
    absorbed photon's polarization first."""
    return _chain_amplitude(setup.p_i, p_f, (setup.k_0, k_1, k_2),
                            eps, r_i, r_f, setup.mass)


def beam_basis_arrays(n_pts: int) -> np.ndarray:
    """Polarization basis of the +z beam photon as a (N, 2, 4) array."""
    out = np.zeros((n_pts, 2, 4))
    out[:, 0, 1] = 1.0   # x
    out[:, 1, 2] = 1.0   # y
    return out


def outgoing_basis_arrays(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Polarization bases for emitted photon directions, (N, 2, 4)."""
    ct, st = np.cos(thetas), np.sin(thetas)
    cp, sp = np.cos(phis), np.sin(phis)
    out = np.zeros(thetas.shape + (2, 4))
    out[..., 0, 1] = ct * cp
    out[..., 0, 2] = ct * sp
    out[..., 0, 3] = -st
    out[..., 1, 1] = -sp
    out[..., 1, 2] = cp
    return out


def amplitude_tensor(setup: CollisionSetup, k_arrays: np.ndarray,
                     p_f: np.ndarray, eps_arrays: list) -> np.ndarray:
    """Amplitudes for every polarization label and spin at stacked points.

    k_arrays: (n_photons, N, 4) four-momenta with the absorbed photon first;
    eps_arrays: per photon, (N, 2, 4) basis polarization four-vectors.
    Returns a complex array (N, 2, ..., 2, 2, 2): one axis of length 2 per
    photon (polarization label, photon order), then r_i, then r_f.
    """
    ks = np.asarray(k_arrays, float)
    n, n_pts = ks.shape[0], ks.shape[1]
    mass = setup.mass
    p_i = np.broadcast_to(setup.p_i.as_array(), (n_pts, 4))
    u_cols = dirac_spinor_batch(p_i, mass)              # (N, 4, 2)
    ubar = dirac_spinor_bar_batch(np.asarray(p_f), mass)  # (N, 2, 4)
    slashed = [slash_batch(e) for e in eps_arrays]      # (N, 2, 4, 4)

    m2 = mass * mass
    metric = np.array([1.0, -1.0, -1.0, -1.0])
    props = {}
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            q = p_i.copy()
            for j in subset:
                q = q + ks[j] if j == 0 else q - ks[j]
            denom = np.einsum('ni,ni->n', q * metric, q) - m2
            props[frozenset(subset)] = (
                (slash_batch(q) + mass * IDENTITY4) / denom[:, None, None])

    ops = {}

    def step_op(used: frozenset, j: int) -> np.ndarray:
        key = (used, j)
        mat = ops.get(key)
        if mat is None:
            mat = props[used][:, None] @ slashed[j]
            ops[key] = mat
        return mat

    def apply(op: np.ndarray, state: np.ndarray, depth: int) -> np.ndarray:
        # op (N, 2, r, 4) acting on state (N, pols..., 4, 2); the new
        # polarization axis lands in front of the existing ones
        op_b = op.reshape(op.shape[:2] + (1,) * depth + op.shape[2:])
        return op_b @ state[:, None]

    # last vertex folded into the final-spinor rows: (N, 2, 2, 4)
    exit_ops = [ubar[:, None] @ slashed[j] for j in range(n)]

    total = None
    level = {(): u_cols}
    for depth in range(n):
        nxt = {}
        for prefix, state in level.items():
            used = set(prefix)
            for j in range(n):
                if j in used:
                    continue
                if depth < n - 1:
                    op = step_op(frozenset(used | {j}), j)
                    nxt[prefix + (j,)] = apply(op, state, depth)
                else:
                    amp = apply(exit_ops[j], state, depth)
                    # axes: (N, pol_xi(n-1), ..., pol_xi(0), r_f, r_i);
                    # reorder to photon order with (r_i, r_f) trailing
                    order = prefix + (j,)
                    perm = ([0] + [1 + (n - 1 - order.index(t))
                                   for t in range(n)] + [n + 2, n + 1])
                    amp = np.transpose(amp, perm)
                    total = amp if total is None else total + amp
        level = nxt
    return mass ** (n - 1) * total


def contract_beam(tensor: np.ndarray, beam_pol) -> np.ndarray:
    """Collapse the absorbed photon's polarization axis.

    beam_pol: label 1 or 2, or a transverse (ex, ey) pair combining the two
    basis amplitudes linearly (the amplitude is linear in the beam
    polarization vector).
    """
    if isinstance(beam_pol, int):
        if beam_pol not in (1, 2):
            raise ValueError(f"beam polarization label must be 1 or 2")
        return tensor[:, beam_pol - 1]
    ex, ey = float(beam_pol[0]), float(beam_pol[1])
    norm = np.hypot(ex, ey)
    if norm == 0.0:
        raise ValueError("beam polarization vector must be non-zero")
    return (ex * tensor[:, 0] + ey * tensor[:, 1]) / norm
