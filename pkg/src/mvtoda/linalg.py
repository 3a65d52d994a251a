"""Small dense complex-matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Functions that
make sense on stacks accept arrays of shape ``(..., n, n)``.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

from .errors import DimensionError, SingularMatrixError

# diagonal [6/6] Pade coefficients: c_j = (12-j)! 6! / (12! j! (6-j)!)
_PADE6 = np.array(
    [math.factorial(12 - j) * math.factorial(6)
     / (math.factorial(12) * math.factorial(j) * math.factorial(6 - j))
     for j in range(7)]
)
_SCALED_NORM = 0.5


def as_cmatrix(m) -> np.ndarray:
    """Return ``m`` as a complex array with at least two dimensions."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = np.diag(a)
    return a


def _require_square(a: np.ndarray) -> None:
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"expected square matrix, got shape {a.shape}")


def max_norm(m) -> float:
    """Largest absolute entry (0 for empty input)."""
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def rel_diff(a, b, floor: float = 0.0) -> float:
    """``max|a - b|`` divided by ``max(max|b|, floor)``; NaN entries are ignored."""
    d = np.abs(np.asarray(a) - np.asarray(b))
    ref = np.abs(np.asarray(b))
    mask = ~np.isnan(d)
    if not mask.any():
        return 0.0
    scale = max(float(np.max(ref[mask])) if ref[mask].size else 0.0, floor)
    num = float(np.max(d[mask]))
    return num / scale if scale > 0 else num


def dagger(m) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(np.asarray(m), -1, -2))


def is_hermitian(m, tol: float = 1e-10) -> bool:
    a = np.asarray(m)
    _require_square(a)
    scale = max(max_norm(a), np.finfo(float).tiny)
    return max_norm(a - dagger(a)) <= tol * scale


def is_positive_definite(m, tol: float = 1e-10) -> bool:
    """Hermitian (to ``tol``) with smallest eigenvalue above ``tol * max|m|``."""
    a = np.asarray(m)
    if not is_hermitian(a, tol):
        return False
    herm = 0.5 * (a + dagger(a))
    evals = np.linalg.eigvalsh(herm)
    return bool(np.all(evals.min(axis=-1) > tol * max_norm(a)))


def mat_exp(m) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [6/6] Pade approximant.

    Works on a single matrix or a stack ``(..., n, n)``.  The squaring count is
    chosen from the largest 1-norm in the stack so that every scaled matrix has
    norm at most 0.5.
    """
    a = as_cmatrix(m)
    _require_square(a)
    n = a.shape[-1]
    norm1 = float(np.max(np.sum(np.abs(a), axis=-2))) if a.size else 0.0
    s = 0
    if norm1 > _SCALED_NORM:
        s = int(math.ceil(math.log2(norm1 / _SCALED_NORM)))
    x = a / 2.0**s

    eye = np.broadcast_to(np.eye(n, dtype=complex), a.shape)
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    c = _PADE6
    even = c[0] * eye + c[2] * x2 + c[4] * x4 + c[6] * x6
    odd = x @ (c[1] * eye + c[3] * x2 + c[5] * x4)
    r = np.linalg.solve(even - odd, even + odd)
    for _ in range(s):
        r = r @ r
    return r


def solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises :class:`SingularMatrixError` carrying the failing pivot index when a
    pivot falls below ``1e-14 * max|a|``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _require_square(a)
    if a.ndim != 2:
        raise DimensionError("solve expects a single matrix")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"right-hand side has {b.shape[0]} rows, matrix has {a.shape[0]}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    threshold = 1e-14 * max_norm(a)
    bad = np.nonzero(pivots <= threshold)[0]
    if bad.size:
        i = int(bad[0])
        raise SingularMatrixError(i, float(pivots[i]))
    return scipy.linalg.lu_solve((lu, piv), b)


def inv(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return solve(a, np.eye(a.shape[0], dtype=complex))


def right_divide(b, a) -> np.ndarray:
    """``b @ inv(a)`` computed as a transposed solve."""
    return solve(np.asarray(a).T, np.asarray(b).T).T
