"""Polynomials in a real variable with square matrix coefficients."""
from __future__ import annotations

import numbers

import numpy as np

from .errors import DimensionError


class MatrixPolynomial:
    """``sum_k coeffs[k] x**k`` with ``N x N`` complex coefficients.

    Multiplication with ``@`` is the non-commutative product of coefficient
    sequences, so ``(P @ Q)(x) == P(x) @ Q(x)``.  Trailing zero coefficients
    are trimmed; the zero polynomial keeps a single zero coefficient.
    """

    __array_ufunc__ = None  # let ndarray @ MatrixPolynomial reach __rmatmul__

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] == 0:
            raise DimensionError(f"coefficients must have shape (deg+1, N, N), got {c.shape}")
        last = c.shape[0]
        while last > 1 and not np.any(c[last - 1]):
            last -= 1
        self.coeffs = c[:last]
        self.coeffs.setflags(write=False)

    @classmethod
    def constant(cls, m) -> "MatrixPolynomial":
        return cls(np.asarray(m, dtype=complex)[None])

    @classmethod
    def identity(cls, n: int) -> "MatrixPolynomial":
        return cls.constant(np.eye(n))

    @classmethod
    def x(cls, n: int, power: int = 1) -> "MatrixPolynomial":
        """``x**power`` times the ``n x n`` identity."""
        c = np.zeros((power + 1, n, n), dtype=complex)
        c[power] = np.eye(n)
        return cls(c)

    @property
    def size(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def leading(self) -> np.ndarray:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return self.degree == 0 and not np.any(self.coeffs[0])

    def coefficient(self, k: int) -> np.ndarray:
        if 0 <= k <= self.degree:
            return self.coeffs[k]
        return np.zeros((self.size, self.size), dtype=complex)

    def __call__(self, x):
        """Evaluate by Horner's rule; array input gives shape ``(*x.shape, N, N)``."""
        x = np.asarray(x, dtype=float)
        out = np.broadcast_to(self.coeffs[-1], x.shape + self.coeffs.shape[1:]).copy()
        xs = x[..., None, None]
        for c in self.coeffs[-2::-1]:
            out = out * xs + c
        return out

    def _padded(self, other, deg):
        out = np.zeros((deg + 1, self.size, self.size), dtype=complex)
        out[: other.coeffs.shape[0]] = other.coeffs
        return out

    def _check(self, other):
        if other.size != self.size:
            raise DimensionError(f"size mismatch: {self.size} vs {other.size}")

    def __add__(self, other):
        if not isinstance(other, MatrixPolynomial):
            return NotImplemented
        self._check(other)
        deg = max(self.degree, other.degree)
        return MatrixPolynomial(self._padded(self, deg) + self._padded(other, deg))

    def __sub__(self, other):
        if not isinstance(other, MatrixPolynomial):
            return NotImplemented
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __mul__(self, scalar):
        if isinstance(scalar, numbers.Number):
            return MatrixPolynomial(self.coeffs * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, MatrixPolynomial):
            self._check(other)
            out = np.zeros((self.degree + other.degree + 1, self.size, self.size), dtype=complex)
            for i, a in enumerate(self.coeffs):
                out[i: i + other.degree + 1] += a @ other.coeffs
            return MatrixPolynomial(out)
        m = np.asarray(other, dtype=complex)
        if m.shape != (self.size, self.size):
            return NotImplemented
        return MatrixPolynomial(self.coeffs @ m)

    def __rmatmul__(self, other):
        m = np.asarray(other, dtype=complex)
        if m.shape != (self.size, self.size):
            return NotImplemented
        return MatrixPolynomial(m @ self.coeffs)

    def times_x(self) -> "MatrixPolynomial":
        c = np.zeros((self.degree + 2, self.size, self.size), dtype=complex)
        c[1:] = self.coeffs
        return MatrixPolynomial(c)

    def conj_transpose(self) -> "MatrixPolynomial":
        """Coefficient-wise adjoint; equals ``P(x)^*`` for real ``x``."""
        return MatrixPolynomial(np.conj(np.swapaxes(self.coeffs, -1, -2)))

    def max_coeff_diff(self, other: "MatrixPolynomial") -> float:
        self._check(other)
        deg = max(self.degree, other.degree)
        return float(np.max(np.abs(self._padded(self, deg) - self._padded(other, deg))))

    def tolist(self) -> list:
        return [[[complex(z) for z in row] for row in c] for c in self.coeffs]

    def __repr__(self):
        return f"MatrixPolynomial(size={self.size}, degree={self.degree})"
