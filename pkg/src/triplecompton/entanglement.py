"""Three-photon polarization density matrices and the genuine-multipartite
entanglement measure tau.

The 8x8 polarization state uses the product basis |l1 l2 l3> with l3 varying
fastest.  tau is obtained from the fully decomposable witness program

    minimize  tr(W rho)
    s.t. for every bipartition s in {1|23, 2|13, 3|12}:
         W = P_s + Q_s^{T_s},  0 <= P_s <= 1,  0 <= Q_s <= 1,

    tau = max(0, -optimum),

solved by a first-order operator-splitting scheme (ADMM with over-relaxation)
whose two projections are closed-form: the affine coupling constraints admit
an exact least-squares projection, and the [0, 1] operator intervals project
by eigenvalue clipping of 8x8 Hermitian matrices.  A returned witness is
re-verified outside the solver by explicit eigendecompositions.

tau = 0 for biseparable states; the GHZ state reaches the maximum 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import amplitude as amp
from .cross_section import _tensor_for_points
from .kinematics import CollisionSetup

BIPARTITIONS = (1, 2, 3)


class InvalidDensityMatrix(ValueError):
    """Input fails the density-matrix requirements."""


class DegenerateStateError(ValueError):
    """Every amplitude vanished; the polarization state is undefined."""


class SolverError(RuntimeError):
    """Witness optimization failed to reach the residual tolerance."""


def basis_index(l1: int, l2: int, l3: int) -> int:
    """Index of |l1 l2 l3> (labels in {1, 2}, l3 fastest)."""
    return 4 * (l1 - 1) + 2 * (l2 - 1) + (l3 - 1)


def ghz_state() -> np.ndarray:
    """(|111> + |222>)/sqrt(2) as a density matrix."""
    psi = np.zeros(8, dtype=complex)
    psi[basis_index(1, 1, 1)] = 1.0
    psi[basis_index(2, 2, 2)] = 1.0
    psi /= math.sqrt(2.0)
    return np.outer(psi, psi.conj())


def w_state() -> np.ndarray:
    """(|112> + |121> + |211>)/sqrt(3) as a density matrix."""
    psi = np.zeros(8, dtype=complex)
    for labels in ((1, 1, 2), (1, 2, 1), (2, 1, 1)):
        psi[basis_index(*labels)] = 1.0
    psi /= math.sqrt(3.0)
    return np.outer(psi, psi.conj())


def product_state(l1: int = 1, l2: int = 1, l3: int = 1) -> np.ndarray:
    psi = np.zeros(8, dtype=complex)
    psi[basis_index(l1, l2, l3)] = 1.0
    return np.outer(psi, psi.conj())


def partial_transpose(rho: np.ndarray, subsystem) -> np.ndarray:
    """Transpose the indices of one photon slot (1, 2 or 3).

    Accepts the bipartition labels "1|23", "2|13", "3|12" as synonyms for the
    transposed singleton side; transposing the complement instead gives the
    complex conjugate, which has the same spectrum.
    """
    if isinstance(subsystem, str):
        subsystem = int(subsystem.split("|")[0])
    if subsystem not in (1, 2, 3):
        raise ValueError(f"bipartition label must name photon 1, 2 or 3")
    t = np.asarray(rho).reshape(2, 2, 2, 2, 2, 2)
    t = t.swapaxes(subsystem - 1, subsystem + 2)
    return t.reshape(8, 8).copy()


def density_from_amplitudes(setup: CollisionSetup, thetas, phis, omega1,
                            omega2, beam_pol=1) -> np.ndarray:
    """rho_{l l'} = N sum_{spins} M(l1 l2 l3) M*(l1' l2' l3'), trace one."""
    tensor, _, _, _, physical = _tensor_for_points(
        setup, 3, np.array([[t] for t in thetas]),
        np.array([[p] for p in phis]),
        np.stack([np.atleast_1d(float(omega1)),
                  np.atleast_1d(float(omega2))]))
    if not physical[0]:
        raise DegenerateStateError("phase-space point is unphysical")
    beam = amp.contract_beam(tensor, beam_pol)[0]      # (2,2,2, r_i, r_f)
    vecs = beam.reshape(8, 4)                          # spin configs as columns
    rho = vecs @ vecs.conj().T
    norm = float(np.trace(rho).real)
    # physical squared amplitudes are >~1e-10 everywhere sampled; collinear
    # zeros leave only double-precision noise (~1e-30)
    if norm <= 1e-18 or not np.isfinite(norm):
        raise DegenerateStateError(
            f"all amplitudes vanish at this point (sum |M|^2 = {norm:.2e})")
    return rho / norm


def _hermitize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.conj().T)


def _validate_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (8, 8):
        raise InvalidDensityMatrix(f"expected 8x8, got {rho.shape}")
    if np.linalg.norm(rho - rho.conj().T) > 1e-10:
        raise InvalidDensityMatrix("matrix is not Hermitian")
    rho = _hermitize(rho)
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise InvalidDensityMatrix(f"trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise InvalidDensityMatrix("negative eigenvalue beyond tolerance")
    return rho


@dataclass(frozen=True)
class Witness:
    """Fully decomposable witness with its per-bipartition decompositions."""

    matrix: np.ndarray
    parts: dict  # subsystem -> (P, Q)

    def feasibility_residuals(self) -> dict:
        """Post-hoc feasibility check by explicit eigendecomposition."""
        res = {}
        for s, (p_mat, q_mat) in self.parts.items():
            affine = np.linalg.norm(
                self.matrix - p_mat - partial_transpose(q_mat, s))
            bounds = 0.0
            for mat in (p_mat, q_mat):
                ev = np.linalg.eigvalsh(_hermitize(mat))
                bounds = max(bounds, -ev.min(), ev.max() - 1.0)
            res[s] = {"affine": float(affine), "bounds": float(max(bounds, 0.0))}
        return res

    @property
    def max_residual(self) -> float:
        res = self.feasibility_residuals()
        return max(max(r["affine"], r["bounds"]) for r in res.values())


@dataclass(frozen=True)
class TauResult:
    """tau with the optimizing witness and solver diagnostics."""

    tau: float
    witness: Witness
    iterations: int
    primal_residual: float
    dual_residual: float

    @property
    def converged(self) -> bool:
        return math.isfinite(self.primal_residual)


def _project_affine(stack: np.ndarray) -> np.ndarray:
    """Least-squares projection onto {W = P_s + Q_s^{T_s} for all s}.

    stack rows: [W, P1, Q1, P2, Q2, P3, Q3].  With residuals
    R_s = W - P_s - Q_s^{T_s} the multipliers are L_s = R_s - (sum R)/5 and

        W -> W - (sum R)/5,  P_s -> P_s + L_s/2,  Q_s -> Q_s + L_s^{T_s}/2.
    """
    w = stack[0]
    residuals = []
    for i, s in enumerate(BIPARTITIONS):
        residuals.append(w - stack[1 + 2 * i]
                         - partial_transpose(stack[2 + 2 * i], s))
    total = residuals[0] + residuals[1] + residuals[2]
    out = np.empty_like(stack)
    out[0] = w - total / 5.0
    for i, s in enumerate(BIPARTITIONS):
        lam = residuals[i] - total / 5.0
        out[1 + 2 * i] = stack[1 + 2 * i] + 0.5 * lam
        out[2 + 2 * i] = stack[2 + 2 * i] + 0.5 * partial_transpose(lam, s)
    return out


def _project_box(stack: np.ndarray) -> np.ndarray:
    """Clip P, Q eigenvalues into [0, 1]; W stays free."""
    out = stack.copy()
    blocks = _hermitize_stack(stack[1:])
    vals, vecs = np.linalg.eigh(blocks)
    vals = np.clip(vals, 0.0, 1.0)
    out[1:] = np.einsum('kab,kb,kcb->kac', vecs, vals, vecs.conj())
    return out


def _hermitize_stack(stack: np.ndarray) -> np.ndarray:
    return 0.5 * (stack + np.conj(np.swapaxes(stack, -1, -2)))


def gme_tau(rho: np.ndarray, tolerance: float = 1e-7,
            max_iterations: int = 200000, step: float = 20.0,
            relaxation: float = 1.0, check_every: int = 25) -> TauResult:
    """Genuine-multipartite-entanglement measure tau of an 8x8 state.

    Runs ADMM (optionally over-relaxed via ``relaxation``) on the witness
    program, stopping when the primal and dual residuals fall below
    ``tolerance`` relative to the iterate scales; raises :class:`SolverError`
    with the residuals if the iteration budget runs out.  The step size is
    re-balanced (with the matching dual rescaling) when the residuals drift
    apart, which rescues the nearly-pure rank-deficient states the amplitude
    construction produces.

    The returned witness is polished into an exactly feasible one: with
    delta the worst eigenvalue violation of any P_s, Q_s, the shift

        P -> (P + delta)/(1 + 2 delta),  Q -> (Q + delta)/(1 + 2 delta),
        W -> (W + 2 delta)/(1 + 2 delta)

    preserves the shared decomposition for every bipartition, so the
    reported tau = max(0, -tr(W rho)) is a certified lower bound on the
    optimum rather than a solver estimate.
    """
    rho = _validate_density(rho)
    cost = np.zeros((7, 8, 8), dtype=complex)
    cost[0] = rho

    x = np.zeros((7, 8, 8), dtype=complex)
    z = np.zeros_like(x)
    u = np.zeros_like(x)
    primal = dual = math.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        x = _project_affine(z - u - step * cost)
        x_rel = relaxation * x + (1.0 - relaxation) * z
        z_new = _project_box(x_rel + u)
        u = u + x_rel - z_new
        if iterations % check_every == 0:
            primal = float(np.linalg.norm(x - z_new))
            dual = float(np.linalg.norm(z_new - z) / step)
            scale_p = max(1.0, float(np.linalg.norm(x)))
            scale_d = max(1.0, float(np.linalg.norm(u)) / step)
            z = z_new
            if primal < tolerance * scale_p and dual < tolerance * scale_d:
                converged = True
                break
            # residual balancing: a larger step attacks a lagging dual
            # residual and vice versa; u is the step-scaled dual variable
            if dual / scale_d > 5.0 * primal / scale_p and step < 1e5:
                step *= 1.6
                u *= 1.6
            elif primal / scale_p > 5.0 * dual / scale_d and step > 1e-4:
                step /= 1.6
                u /= 1.6
        else:
            z = z_new
    if not converged:
        raise SolverError(
            f"no convergence in {max_iterations} iterations: "
            f"primal={primal:.3e} dual={dual:.3e}")

    witness = _feasibilize(x)
    objective = float(np.trace(witness.matrix @ rho).real)
    return TauResult(max(0.0, -objective), witness, iterations, primal, dual)


def _feasibilize(x: np.ndarray) -> Witness:
    """Shift-and-scale an affine-exact iterate into an exactly feasible
    witness (identity shifts commute with every partial transpose)."""
    delta = 0.0
    for block in x[1:]:
        ev = np.linalg.eigvalsh(_hermitize(block))
        delta = max(delta, -float(ev.min()), float(ev.max()) - 1.0)
    delta = max(delta, 0.0)
    scale = 1.0 + 2.0 * delta
    eye = np.eye(8)
    parts = {}
    for i, s in enumerate(BIPARTITIONS):
        parts[s] = (
            (_hermitize(x[1 + 2 * i]) + delta * eye) / scale,
            (_hermitize(x[2 + 2 * i]) + delta * eye) / scale,
        )
    return Witness((_hermitize(x[0]) + 2.0 * delta * eye) / scale, parts)


def tau_grid(setup: CollisionSetup, thetas, phis, omega1_grid, omega2_grid,
             beam_pol=1, threshold_eps: float = 0.0,
             tolerance: float = 1e-7):
    """tau over an (omega1, omega2) grid; masked (tau = 0) wherever the point
    is unphysical or any photon falls below the detector threshold.

    Returns (tau array, masked boolean array), shapes (len(w1), len(w2)).
    """
    from .kinematics import close_batch

    w1g = np.asarray(omega1_grid, float)
    w2g = np.asarray(omega2_grid, float)
    w1m, w2m = np.meshgrid(w1g, w2g, indexing="ij")
    n = w1m.size
    th = np.repeat(np.asarray(thetas, float)[:, None], n, axis=1)
    ph = np.repeat(np.asarray(phis, float)[:, None], n, axis=1)
    w3, _, _, _, physical, _ = close_batch(setup, th, ph, w1m.ravel(),
                                           w2m.ravel())
    ok = physical & (w3 >= threshold_eps) \
        & (w1m.ravel() >= threshold_eps) & (w2m.ravel() >= threshold_eps)
    taus = np.zeros(n)
    masked = ~ok
    for i in np.nonzero(ok)[0]:
        try:
            rho = density_from_amplitudes(
                setup, thetas, phis, w1m.ravel()[i], w2m.ravel()[i], beam_pol)
        except DegenerateStateError:
            masked[i] = True
            continue
        taus[i] = gme_tau(rho, tolerance=tolerance).tau
    return taus.reshape(w1m.shape), masked.reshape(w1m.shape)


def save_density_matrix(path, rho: np.ndarray) -> None:
    """Write an 8x8 complex matrix as rows of 're im' pairs."""
    rho = np.asarray(rho, dtype=complex)
    with open(path, "w", encoding="ascii") as fh:
        for row in rho:
            fh.write(" ".join(f"{v.real:.17e} {v.imag:.17e}" for v in row))
            fh.write("\n")


def load_density_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`save_density_matrix`."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            nums = [float(tok) for tok in line.split()]
            rows.append([complex(nums[i], nums[i + 1])
                         for i in range(0, len(nums), 2)])
    return np.asarray(rows, dtype=complex)
