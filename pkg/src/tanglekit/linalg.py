"""Small dense linear algebra used by the invariant routines.

Everything here works on matrices of dimension <= 8 and is written for
accuracy on rank-deficient inputs rather than speed.
"""
import math

import numpy as np

_EPS = np.finfo(float).eps


class ConvergenceError(ArithmeticError):
    """Raised when a Jacobi iteration exceeds its sweep cap."""


def _rotation(alpha, beta, gamma):
    """Jacobi rotation zeroing the off-diagonal of [[alpha, gamma], [gamma*, beta]].

    Returns (c, s, phase) such that the unitary ``diag(1, phase) @ [[c, s], [-s, c]]``
    diagonalizes the 2x2 Hermitian block.
    """
    g = abs(gamma)
    phase = gamma / g
    zeta = (beta - alpha) / (2.0 * g)
    t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, c * t, phase


def jacobi_eigh(h, max_sweeps=50):
    """Eigen-decomposition of a Hermitian matrix by cyclic two-sided Jacobi.

    Parameters
    ----------
    h : array_like, shape (n, n)
        Hermitian matrix. Only Hermitian-ness up to roundoff is assumed.
    max_sweeps : int
        Cap on full cyclic sweeps before :class:`ConvergenceError`.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in ascending order.
    v : ndarray, shape (n, n)
        Unitary matrix whose columns are the matching eigenvectors.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.abs(a[offdiag]).max(initial=0.0)
        if off <= _EPS * 1e-3 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                gamma = a[p, q]
                if abs(gamma) <= _EPS * 1e-3 * scale:
                    continue
                c, s, phase = _rotation(a[p, p].real, a[q, q].real, gamma)
                r = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ r
                a[idx, :] = r.conj().T @ a[idx, :]
                a[q, p] = 0.0
                a[p, q] = 0.0
                v[:, idx] = v[:, idx] @ r
    else:
        if np.abs(a[offdiag]).max(initial=0.0) > _EPS * scale:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def jacobi_singular_values(a, max_sweeps=60):
    """Singular values of a complex matrix by one-sided (Hestenes) Jacobi.

    Columns are orthogonalized pairwise, which is cyclic Jacobi applied
    implicitly to ``a^H a``. Small singular values keep absolute accuracy
    near ``eps * ||a||`` instead of ``sqrt(eps)``, which is what matters when
    their square roots are never taken. Returned in descending order.
    """
    u = np.array(a, dtype=complex)
    if u.shape[0] < u.shape[1]:
        u = u.conj().T
    n = u.shape[1]
    # columns below this squared norm are numerically zero
    tiny = (_EPS * np.linalg.norm(u)) ** 2
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                up, uq = u[:, p], u[:, q]
                alpha = float(np.vdot(up, up).real)
                beta = float(np.vdot(uq, uq).real)
                gamma = complex(np.vdot(up, uq))
                if abs(gamma) <= _EPS * math.sqrt(alpha * beta) or abs(gamma) == 0.0 or min(alpha, beta) <= tiny:
                    continue
                rotated = True
                c, s, phase = _rotation(alpha, beta, gamma)
                uq = uq * phase.conjugate()
                u[:, p], u[:, q] = c * up - s * uq, s * up + c * uq
        if not rotated:
            break
    else:
        raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.linalg.norm(u, axis=0))[::-1]


def elementary_symmetric(values, order=None):
    """e_0..e_order of ``values`` by the standard product recurrence.

    For nonnegative inputs every term is a sum of nonnegative products, so
    each e_k keeps full relative accuracy.
    """
    values = list(values)
    order = len(values) if order is None else order
    e = [1.0] + [0.0] * order
    for x in values:
        for k in range(order, 0, -1):
            e[k] += x * e[k - 1]
    return e


def newton_coefficients(power_sums):
    """Elementary symmetric polynomials e_1..e_m from power sums p_1..p_m.

    ``k e_k = sum_{i=1}^{k} (-1)^{i-1} e_{k-i} p_i``.
    """
    e = [1.0]
    for k in range(1, len(power_sums) + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * power_sums[i - 1]
        e.append(acc / k)
    return e[1:]
