"""Best-found convex roof of the three-tangle for three-qubit mixed states.

Every m-member decomposition of a rank-r state is ``Phi = U[:, :r] W`` with
``W`` the rows ``sqrt(mu_k) e_k`` of the eigen-ensemble and ``U`` an m x m
unitary. The search moves ``U`` by left multiplication with elementary
rotations ``exp(theta E)`` (E a real or imaginary generator acting on two
members), so only two rows of ``Phi`` change per move and the ensemble
always reconstructs rho. The result is an upper bound on the convex roof.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .invariants import three_tangle_poly
from .qstate import PureState, StateError, as_density, derive_seed

RANK_TOL = 1e-12
ISOMETRY_TOL = 1e-8
DEFAULT_SIZE_CAP = 8
STALL_ITERATIONS = 200
INITIAL_STEP = 0.3
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ConvexRoofConfig:
    max_ensemble_size: int | None = None
    restarts: int = 32
    max_iterations: int = 2000
    tolerance: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_ensemble_size is not None and self.max_ensemble_size < 1:
            raise ValueError("max_ensemble_size must be >= 1")

    def sizes(self, rank):
        top = self.max_ensemble_size
        if top is None:
            top = min(rank + 2, DEFAULT_SIZE_CAP)
        if top < rank:
            raise ValueError(f"max_ensemble_size {top} is below the rank {rank} of the target")
        return range(rank, top + 1)


@dataclass(frozen=True)
class EnsembleDecomposition:
    members: tuple  # of (probability, PureState)

    def density(self):
        return sum(p * np.outer(s.amplitudes, s.amplitudes.conj()) for p, s in self.members)

    def average_tangle(self):
        return float(sum(p * three_tangle_poly(s.amplitudes) for p, s in self.members))


@dataclass(frozen=True)
class ConvexRoofResult:
    value: float
    witness: EnsembleDecomposition
    restarts_used: int
    iterations: int
    converged: bool
    ensemble_size: int
    eigen_value: float


def eigen_ensemble(rho):
    """Rows sqrt(mu_k) e_k^T for the nonzero eigenvalues, largest first."""
    w, v = np.linalg.eigh(rho.elements)
    keep = w > RANK_TOL
    w, v = w[keep][::-1], v[:, keep][:, ::-1]
    return (v * np.sqrt(w)).T


def _three_qubit(rho):
    rho = as_density(rho)
    if rho.n_qubits != 3:
        raise StateError(f"expected a three-qubit density matrix, got {rho.n_qubits} qubits")
    return rho


def _row_values(rows):
    """p_i * tangle(phi_i) for unnormalized rows phi~_i = sqrt(p_i) phi_i."""
    p = np.sum(rows.real**2 + rows.imag**2, axis=-1)
    poly = three_tangle_poly(rows)
    return np.divide(poly, p, out=np.zeros_like(p), where=p > 1e-300)


def _ensemble(rows):
    members = []
    for row in rows:
        p = float(np.vdot(row, row).real)
        if p > 1e-30:
            members.append((p, PureState(3, row / math.sqrt(p))))
    return EnsembleDecomposition(tuple(members))


def decompose(rho, mixing):
    """Decomposition ``phi~_i = sum_k mixing[i, k] sqrt(mu_k) e_k`` of rho.

    ``mixing`` is an m x r isometry (orthonormal columns) with r the rank of
    rho; members with zero weight are dropped.
    """
    rho = _three_qubit(rho)
    w = eigen_ensemble(rho)
    u = np.atleast_2d(np.asarray(mixing, dtype=complex))
    r = w.shape[0]
    if u.shape[1] != r or u.shape[0] < r:
        raise StateError(f"mixing must be m x {r} with m >= {r}, got {u.shape}")
    gram = u.conj().T @ u
    if np.abs(gram - np.eye(r)).max() > ISOMETRY_TOL:
        raise StateError("mixing is not an isometry (column Gram deviates from identity)")
    return _ensemble(u @ w)


def _random_unitary(rng, m):
    """exp(iH) for a Gaussian Hermitian H (a random antihermitian generator)."""
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    h = (z + z.conj().T) / 2.0
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def _search(w, m, cfg):
    """Lockstep compass search over all restarts for ensemble size m.

    Returns final rows (R, m, 8), objective values (R,), iterations (R,)
    and converged flags (R,). Each restart only reads its own slice, so its
    trajectory does not depend on how many restarts run beside it.
    """
    r = w.shape[0]
    n_restart = cfg.restarts
    starts = []
    for i in range(n_restart):
        if i == 0:
            u = np.eye(m, dtype=complex)
        else:
            u = _random_unitary(np.random.default_rng(derive_seed(cfg.seed, m, i)), m)
        starts.append(u[:, :r] @ w)
    phi = np.array(starts)
    vals = _row_values(phi)
    total = vals.sum(axis=1)

    iters = np.zeros(n_restart, dtype=int)
    converged = np.zeros(n_restart, dtype=bool)
    a_idx, b_idx = np.triu_indices(m, 1)
    if a_idx.size == 0:
        return phi, total, iters, np.ones(n_restart, dtype=bool)

    active = np.ones(n_restart, dtype=bool)
    step = np.full(n_restart, INITIAL_STEP)
    ref = total.copy()
    last_gain = np.zeros(n_restart, dtype=int)

    for it in range(1, cfg.max_iterations + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        c = np.array([math.cos(x) for x in step[idx]])[:, None, None, None]
        s = np.array([math.sin(x) for x in step[idx]])[:, None, None, None]
        # poll phases rotate with each restart's own iteration count
        base = [_GOLDEN * k % 1.0 * 2.0 * math.pi for k in iters[idx]]
        ph = np.array([[cmath.exp(1j * (b + q * math.pi / 2)) for q in range(4)] for b in base])
        ph = ph[:, :, None, None]
        ra, rb = phi[idx][:, None, a_idx], phi[idx][:, None, b_idx]
        cand_a = c * ra - s * ph * rb
        cand_b = s * ph.conj() * ra + c * rb
        old = vals[idx][:, a_idx] + vals[idx][:, b_idx]
        va, vb = _row_values(cand_a), _row_values(cand_b)
        delta = (va + vb - old[:, None, :]).reshape(idx.size, -1)
        best = np.argmin(delta, axis=1)
        gain = delta[np.arange(idx.size), best]
        iters[idx] += 1

        better = gain < -1e-15 * np.maximum(1.0, total[idx])
        loc = np.flatnonzero(better)
        if loc.size:
            g = idx[loc]
            move, pair = np.divmod(best[loc], a_idx.size)
            a, b = a_idx[pair], b_idx[pair]
            phi[g, a], phi[g, b] = cand_a[loc, move, pair], cand_b[loc, move, pair]
            vals[g, a], vals[g, b] = va[loc, move, pair], vb[loc, move, pair]
            total[g] = vals[g].sum(axis=1)
        step[idx] = np.where(better, np.minimum(step[idx] * 1.5, 1.0), step[idx] * 0.5)

        gained = total[idx] < ref[idx] - cfg.tolerance
        ref[idx[gained]] = total[idx[gained]]
        last_gain[idx[gained]] = it
        done = (it - last_gain[idx] >= STALL_ITERATIONS) | (step[idx] < cfg.tolerance) | (total[idx] <= 1e-15)
        converged[idx[done]] = True
        active[idx[done]] = False

    total = _row_values(phi).sum(axis=1)
    return phi, total, iters, converged


def three_tangle_mixed(rho, config=None):
    """Best-found convex roof of the three-tangle.

    Sweeps ensemble sizes m = rank .. max_ensemble_size, runs
    ``config.restarts`` local searches per size (restart 0 starts from the
    eigen-ensemble) and returns the lowest value found, ties going to the
    smaller m and lower restart index. The value is an upper bound on the
    true convex roof.
    """
    rho = _three_qubit(rho)
    cfg = config or ConvexRoofConfig()
    w = eigen_ensemble(rho)
    rank = w.shape[0]
    sizes = cfg.sizes(rank)
    eigen_value = float(_row_values(w).sum())

    best = None
    restarts_used = iterations = 0
    for m in sizes:
        phi, total, iters, conv = _search(w, m, cfg)
        restarts_used += cfg.restarts
        iterations += int(iters.sum())
        k = int(np.argmin(total))
        if best is None or total[k] < best[0]:
            best = (float(total[k]), phi[k], bool(conv[k]), m)

    value, rows, converged, m = best
    witness = _ensemble(rows)
    return ConvexRoofResult(
        value=witness.average_tangle(),
        witness=witness,
        restarts_used=restarts_used,
        iterations=iterations,
        converged=converged,
        ensemble_size=m,
        eigen_value=eigen_value,
    )
