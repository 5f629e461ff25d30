"""Spin-flip spectra, concurrence, characteristic-polynomial coefficients and
the amplitude-level (D-invariant) expansions of n4, n8 and the one-tangle.

For a two-qubit marginal rho the matrix rho * rho~ has the characteristic
polynomial ``x^4 - n4 x^3 + n8 x^2 - n12 x + n16``. The coefficients are
computed two ways: from its spectrum and by Newton's identities on
``tr((rho rho~)^k)``; tests hold them against each other and against the
D-invariant sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .qstate import (
    DensityMatrix,
    MultiIndex,
    PureState,
    StateError,
    amplitude_matrix,
    as_density,
    focus_order,
    marginal,
    permute_qubits,
)

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SIGMA_Y, SIGMA_Y).real  # [[0,0,0,-1],[0,0,1,0],[0,1,0,0],[-1,0,0,0]]

NEGATIVE_TOL = 1e-8
# eigenvalues of rho below this fraction of the largest are roundoff
RANK_FLOOR = 1e-14


@dataclass(frozen=True)
class SpinFlipSpectrum:
    """Eigenvalues of rho * rho~, descending, and their square roots.

    ``roots`` are computed directly (as singular values) so they stay
    accurate where ``sqrt(lambdas)`` of roundoff-level values would not.
    """

    lambdas: tuple
    roots: tuple


@dataclass(frozen=True)
class PairInvariants:
    n4: float
    n8: float
    n12: float
    n16: float
    c_value: float
    two_tangle: float
    f16: float
    chi_plus: float
    chi_minus: float
    active_chi: float
    lambdas: tuple


def _two_qubit(rho):
    rho = as_density(rho)
    if rho.n_qubits != 2:
        raise StateError(f"expected a two-qubit density matrix, got {rho.n_qubits} qubits")
    return rho


def spin_flip(rho):
    """rho~ = (sy x sy) rho* (sy x sy)."""
    rho = _two_qubit(rho)
    return YY @ rho.elements.conj() @ YY


def _factor(rho):
    """Matrix F with rho = F F^H, at most 4 columns."""
    if rho.factor is not None:
        return np.asarray(rho.factor)
    w, v = linalg.jacobi_eigh(rho.elements)
    if w[0] < -NEGATIVE_TOL:
        raise StateError(f"density matrix has eigenvalue {w[0]!r} < -{NEGATIVE_TOL}")
    w = np.where(w < RANK_FLOOR * max(w[-1], 0.0), 0.0, w)
    # F = sqrt(rho) up to a right unitary; any such F gives the same spectrum
    return v * np.sqrt(w)


def flip_spectrum(rho):
    """Spectrum of rho * rho~.

    With rho = F F^H and A = F^T (sy x sy) F, the Hermitian matrix A^H A is
    similar to rho * rho~ (for F = sqrt(rho) it is sqrt(rho) rho~ sqrt(rho)).
    Its eigenvalues are found by one-sided Jacobi on A, i.e. as squared
    singular values.
    """
    rho = _two_qubit(rho)
    f = _factor(rho)
    a = f.T @ YY @ f
    sv = linalg.jacobi_singular_values(a)
    roots = np.zeros(4)
    roots[: min(4, sv.size)] = sv[:4]
    return SpinFlipSpectrum(tuple(float(x * x) for x in roots), tuple(float(x) for x in roots))


def char_poly_coefficients(rho):
    """(n4, n8, n12, n16) by Newton's identities on tr((rho rho~)^k), k = 1..4."""
    rho = _two_qubit(rho)
    m = rho.elements @ spin_flip(rho)
    power_sums = []
    mk = np.eye(4, dtype=complex)
    for _ in range(4):
        mk = mk @ m
        power_sums.append(float(np.trace(mk).real))
    return tuple(linalg.newton_coefficients(power_sums))


def concurrence(rho):
    """Return ``(C, tau)`` with C = s1 - s2 - s3 - s4 and tau = max(0, C)."""
    s = flip_spectrum(rho).roots
    c = s[0] - s[1] - s[2] - s[3]
    return c, max(0.0, c)


def pair_invariants(rho):
    """Characteristic-polynomial coefficients and the derived f16 / chi values.

    The n_d are the elementary symmetric polynomials of the spin-flip
    spectrum, evaluated by the product recurrence on nonnegative eigenvalues.
    Newton's identities give the same numbers (see
    :func:`char_poly_coefficients`) but lose relative accuracy in small n12
    and n16, which the square roots in f16 and chi then amplify.
    """
    sp = flip_spectrum(rho)
    lam, s = sp.lambdas, sp.roots
    _, n4, n8, n12, n16 = linalg.elementary_symmetric(lam)
    c = s[0] - s[1] - s[2] - s[3]
    c2 = c * c
    sqrt_n16 = s[0] * s[1] * s[2] * s[3]
    f16 = sqrt_n16 * c2 * (n4 - c2) + n12 * c2
    sqrt_f16 = math.sqrt(max(f16, 0.0))
    chi_plus = 8.0 * (sqrt_n16 + sqrt_f16)
    chi_minus = 8.0 * sqrt_n16 - 8.0 * sqrt_f16 + 2.0 * n4 * c2 - c2 * c2
    return PairInvariants(
        n4=n4, n8=n8, n12=n12, n16=n16,
        c_value=c, two_tangle=max(0.0, c),
        f16=f16, chi_plus=chi_plus, chi_minus=chi_minus,
        active_chi=chi_plus if c >= 0 else chi_minus,
        lambdas=lam,
    )


def n4_relation_rhs(inv):
    """sqrt(4 n8 + chi) on the active branch."""
    return math.sqrt(max(4.0 * inv.n8 + inv.active_chi, 0.0))


def verify_n4_relation(rho):
    """|n4 - tau^2 - sqrt(4 n8 + chi)| for a two-qubit state (or its PairInvariants)."""
    inv = rho if isinstance(rho, PairInvariants) else pair_invariants(rho)
    return abs(inv.n4 - inv.two_tangle**2 - n4_relation_rhs(inv))


# -- pure-state quantities ----------------------------------------------------

def one_tangle(state, focus=1):
    """4 det(rho_focus)."""
    r = marginal(state, [focus]).elements
    return max(0.0, 4.0 * float((r[0, 0] * r[1, 1]).real - abs(r[0, 1]) ** 2))


def _rest_positions(n, focus, j):
    if focus == j:
        raise StateError("focus and partner qubit must differ")
    for q in (focus, j):
        if not 1 <= q <= n:
            raise StateError(f"qubit position {q} out of range 1..{n}")
    return tuple(q for q in range(1, n + 1) if q not in (focus, j))


def _pair_blocks(state, focus, j):
    """Rows a_{i_f i_j I} for (i_f, i_j) = 00, 01, 10, 11, columns over I."""
    return amplitude_matrix(state, [focus, j])


def d_matrix(state, focus, j):
    """All D_{focus j I J} as a matrix indexed by MultiIndex values (I, J).

    ``D_IJ = a_{0 0 I} a_{1 1 J} - a_{1 0 J} a_{0 1 I}`` where the two
    leading subscripts are the focus and qubit-j bits.
    """
    _rest_positions(state.n_qubits, focus, j)
    a00, a01, a10, a11 = _pair_blocks(state, focus, j)
    return np.outer(a00, a11) - np.outer(a01, a10)


def _index_value(idx, rest):
    if isinstance(idx, MultiIndex):
        if tuple(idx.positions) != tuple(rest):
            raise StateError(f"MultiIndex positions {idx.positions} do not match traced qubits {rest}")
        return idx.value
    idx = int(idx)
    if not 0 <= idx < 2 ** len(rest):
        raise StateError(f"index {idx} out of range for {len(rest)} traced qubits")
    return idx


def d_invariant(state, focus, j, i_index, j_index):
    """Single D_{focus j I J}; indices are MultiIndex objects or their values."""
    rest = _rest_positions(state.n_qubits, focus, j)
    i_v, j_v = _index_value(i_index, rest), _index_value(j_index, rest)
    a00, a01, a10, a11 = _pair_blocks(state, focus, j)
    return complex(a00[i_v] * a11[j_v] - a10[j_v] * a01[i_v])


def _symmetrized(state, focus, j):
    d = d_matrix(state, focus, j)
    return d + d.T


def n4_from_invariants(state, focus, j):
    """n4 of rho_{focus j} from the D-invariants.

    Off-diagonal pairs count twice and each diagonal term once:
    ``2 sum_{I<J} |D_IJ + D_JI|^2 + sum_I |2 D_II|^2``.
    """
    g = _symmetrized(state, focus, j)
    iu = np.triu_indices(g.shape[0], 1)
    return float(2.0 * np.sum(np.abs(g[iu]) ** 2) + np.sum(np.abs(np.diag(g)) ** 2))


_N8_DIRECT_MAX = 64


def n8_from_invariants(state, focus, j):
    """n8 of rho_{focus j} as a sum of squared 2x2 minors of G = D + D^T.

    Each minor ``G_IJ G_KL - G_IL G_KJ`` is taken once (I < K, J < L). For
    more than 64 traced-index values the same sum is contracted to
    ``(||G||_F^4 - ||G G^H||_F^2) / 2`` to keep the cost polynomial.
    """
    g = _symmetrized(state, focus, j)
    k = g.shape[0]
    if k > _N8_DIRECT_MAX:
        gg = g @ g.conj().T
        return float(0.5 * (np.sum(np.abs(g) ** 2) ** 2 - np.sum(np.abs(gg) ** 2)))
    total = 0.0
    for i in range(k - 1):
        gi, gk = g[i], g[i + 1:]
        m = gi[None, :, None] * gk[:, None, :] - gk[:, :, None] * gi[None, None, :]
        total += 0.5 * float(np.sum(np.abs(m) ** 2))
    return total


def one_tangle_from_invariants(state, focus=1):
    """One-tangle of ``focus`` as a sum of squared 2x2 amplitude determinants.

    For partner j and traced indices I, J the determinant
    ``a_{0 0 I} a_{1 1 J} - a_{0 1 J} a_{1 0 I}`` pairs the columns
    (i_j = 0, I) and (i_j = 1, J) of the focus-qubit amplitude matrix; for
    I = J it is D_{focus j I I}. Each column pair is counted once, under
    the first qubit (in ascending order) where the two columns differ, so
    I and J must agree on all traced qubits before j.
    """
    n = state.n_qubits
    total = 0.0
    for j in range(1, n + 1):
        if j == focus:
            continue
        rest = _rest_positions(n, focus, j)
        shift = sum(1 for q in rest if q > j)
        a00, a01, a10, a11 = _pair_blocks(state, focus, j)
        minors = np.outer(a00, a11) - np.outer(a10, a01)
        idx = np.arange(a00.size)
        same_prefix = (idx[:, None] >> shift) == (idx[None, :] >> shift)
        total += float(np.sum(np.abs(minors[same_prefix]) ** 2))
    return 4.0 * total


def three_tangle_poly(vecs):
    """4 |(D01 + D10)^2 - 4 D00 D11| for three-qubit vectors on the last axis.

    Homogeneous of degree 4; for a normalized vector this is the three-tangle.
    """
    a = np.asarray(vecs)
    a000, a001, a010, a011, a100, a101, a110, a111 = (a[..., i] for i in range(8))
    d00 = a000 * a110 - a100 * a010
    d01 = a000 * a111 - a101 * a010
    d10 = a001 * a110 - a100 * a011
    d11 = a001 * a111 - a101 * a011
    return 4.0 * np.abs((d01 + d10) ** 2 - 4.0 * d00 * d11)


def three_tangle_pure(state3, focus=1, j=2, k=3):
    """Three-tangle of a three-qubit pure state with (focus, j, k) mapped to (1, 2, 3)."""
    if not isinstance(state3, PureState) or state3.n_qubits != 3:
        n = getattr(state3, "n_qubits", None)
        raise StateError(f"three_tangle_pure needs a 3-qubit pure state, got n={n}")
    if sorted((focus, j, k)) != [1, 2, 3]:
        raise StateError(f"(focus, j, k) = {(focus, j, k)} is not a permutation of (1, 2, 3)")
    psi = permute_qubits(state3, [focus, j, k]) if (focus, j, k) != (1, 2, 3) else state3
    return float(three_tangle_poly(psi.amplitudes))


def pair_invariants_for(state, focus, j):
    """PairInvariants of the (focus, j) marginal of a pure state."""
    return pair_invariants(marginal(state, [focus, j]))


def focus_first(state, focus):
    """Relabel so ``focus`` becomes qubit 1; returns (state, old labels by new position)."""
    order = focus_order(state.n_qubits, focus)
    if focus == 1:
        return state, order
    return permute_qubits(state, order), order
