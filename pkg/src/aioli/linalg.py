"""Small dense linear algebra: Cholesky factor maintenance and 2x2 eigensolves.

The forecaster only ever needs three primitives on its d x d lower-triangular
factor (rank-1 update, forward solve, back solve) plus an exact economic
eigendecomposition of the 2x2 Gram matrix of the reduced problem. Everything
here is O(d^2) or O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

DEFAULT_RANK_TOL = 1e-10


def _cholupdate_inplace(L, w):
    d = w.shape[0]
    for k in range(d):
        lkk = L[k, k]
        r = math.sqrt(lkk * lkk + w[k] * w[k])
        c = r / lkk
        s = w[k] / lkk
        L[k, k] = r
        for i in range(k + 1, d):
            L[i, k] = (L[i, k] + s * w[i]) / c
            w[i] = c * w[i] - s * L[i, k]


def _forward_solve(L, rhs):
    d = rhs.shape[0]
    out = np.empty(d)
    for i in range(d):
        acc = rhs[i]
        for j in range(i):
            acc -= L[i, j] * out[j]
        out[i] = acc / L[i, i]
    return out


def _back_solve_t(L, rhs):
    # solves L^T w = rhs
    d = rhs.shape[0]
    out = np.empty(d)
    for i in range(d - 1, -1, -1):
        acc = rhs[i]
        for j in range(i + 1, d):
            acc -= L[j, i] * out[j]
        out[i] = acc / L[i, i]
    return out


if _HAVE_NUMBA:
    _cholupdate_inplace = njit(cache=True)(_cholupdate_inplace)
    _forward_solve = njit(cache=True)(_forward_solve)
    _back_solve_t = njit(cache=True)(_back_solve_t)


@dataclass(frozen=True)
class EigenPair2:
    """Economic eigendecomposition of a 2x2 symmetric PSD matrix.

    ``p`` is the numerical rank (0, 1 or 2), ``U`` is 2 x p with orthonormal
    columns and ``sigma`` holds the p kept eigenvalues in descending order.
    """

    p: int
    U: np.ndarray
    sigma: np.ndarray


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite entries in {name}")


def cholesky_rank1_update(L: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return the lower-triangular factor of ``L L^T + v v^T``.

    Single O(d^2) pass of Givens-style rotations; ``L`` is not modified.
    """
    _check_finite(L, "L")
    _check_finite(v, "v")
    out = np.ascontiguousarray(L, dtype=float).copy()
    w = np.ascontiguousarray(v, dtype=float).copy()
    _cholupdate_inplace(out, w)
    return out


def solve_lower(L: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Forward substitution: solve ``L w = rhs``."""
    _check_finite(rhs, "rhs")
    if _HAVE_NUMBA:
        return _forward_solve(np.ascontiguousarray(L), np.ascontiguousarray(rhs, dtype=float))
    return solve_triangular(L, rhs, lower=True, check_finite=False)


def solve_upper_transpose(L: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Back substitution: solve ``L^T w = rhs``."""
    _check_finite(rhs, "rhs")
    if _HAVE_NUMBA:
        return _back_solve_t(np.ascontiguousarray(L), np.ascontiguousarray(rhs, dtype=float))
    return solve_triangular(L, rhs, lower=True, trans="T", check_finite=False)


def eig2_symmetric_psd(M: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> EigenPair2:
    """Closed-form economic eigendecomposition of a 2x2 symmetric PSD matrix.

    Eigenvalues at or below ``rank_tol * max(1, trace(M))`` are treated as
    zero and dropped; ``p == 0`` signals a numerically zero matrix and is
    handled by the caller.
    """
    M = np.asarray(M, dtype=float)
    _check_finite(M, "M")
    a, b = M[0, 0], M[1, 1]
    c = 0.5 * (M[0, 1] + M[1, 0])
    if abs(M[0, 1] - M[1, 0]) > 1e-8 * max(1.0, abs(a) + abs(b)):
        raise ValueError("matrix is not symmetric")
    tr = a + b
    disc = math.hypot(a - b, 2.0 * c)
    lam1 = 0.5 * (tr + disc)
    lam2 = 0.5 * (tr - disc)
    cutoff = rank_tol * max(1.0, tr)
    if lam2 < -cutoff - 1e-12:
        raise ValueError(f"significantly negative eigenvalue {lam2}")

    # Eigenvector for lam1: pick the better-conditioned of the two residual
    # columns; the second direction is its orthogonal complement.
    u1 = np.array([c, lam1 - a])
    u1_alt = np.array([lam1 - b, c])
    if np.dot(u1_alt, u1_alt) > np.dot(u1, u1):
        u1 = u1_alt
    n1 = np.linalg.norm(u1)
    if n1 == 0.0:  # already diagonal
        u1 = np.array([1.0, 0.0])
    else:
        u1 = u1 / n1
    u2 = np.array([-u1[1], u1[0]])

    cols, vals = [], []
    for lam, u in ((lam1, u1), (lam2, u2)):
        if lam > cutoff:
            cols.append(u)
            vals.append(lam)
    if not cols:
        return EigenPair2(0, np.zeros((2, 0)), np.zeros(0))
    return EigenPair2(len(cols), np.column_stack(cols), np.array(vals))
