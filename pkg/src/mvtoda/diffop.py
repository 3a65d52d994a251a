"""Banded difference operators ``M = sum_j G_j(n) delta^j`` paired with a symbol ``Lambda``.

The pairing is ``P_n(x) Lambda(x) = sum_j G_j(n) P_{n+j}(x)``.  Coefficients
are stored in an array ``coeff[j + k, n]`` for ``-k <= j <= k`` and
``0 <= n <= nmax``.  Two boundary conventions apply:

* ``G_j(n) = 0`` whenever ``n + j < 0`` (``P_m = 0`` for ``m < 0``);
* entries that would need ``P_m`` with ``m > nmax`` are *unavailable* and hold
  NaN.  NaN propagates through sums and products, so anything computed from an
  unavailable entry is unavailable too.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConsistencyError, ContractError, DimensionError, ParameterError
from .linalg import dagger, max_norm, right_divide
from .mvop import MvopFamily
from .polynomial import MatrixPolynomial
from .quadrature import QuadratureRule

PEARSON_TOL = 1e-9
PEARSON_RAISE = 1e-7


@dataclass(frozen=True, eq=False)
class BandedDifferenceOperator:
    coeff: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        c = self.coeff
        if c.ndim != 4 or c.shape[0] % 2 != 1 or c.shape[2] != c.shape[3]:
            raise DimensionError(f"coefficient array must be (2k+1, nmax+1, N, N), got {c.shape}")

    @property
    def k(self) -> int:
        return (self.coeff.shape[0] - 1) // 2

    @property
    def nmax(self) -> int:
        return self.coeff.shape[1] - 1

    @property
    def size(self) -> int:
        return self.coeff.shape[-1]

    @classmethod
    def empty(cls, k: int, nmax: int, size: int, t: float = 0.0) -> "BandedDifferenceOperator":
        """All entries unavailable except the structural zeros ``n + j < 0``."""
        c = np.full((2 * k + 1, nmax + 1, size, size), np.nan, dtype=complex)
        for j in range(-k, 0):
            c[j + k, : min(-j, nmax + 1)] = 0.0
        return cls(c, t)

    @classmethod
    def from_bands(cls, bands: dict, t: float = 0.0) -> "BandedDifferenceOperator":
        """Build from ``{j: array of shape (nmax+1, N, N)}``; missing bands are zero."""
        k = max(abs(j) for j in bands)
        first = np.asarray(next(iter(bands.values())))
        c = np.zeros((2 * k + 1,) + first.shape, dtype=complex)
        for j, arr in bands.items():
            c[j + k] = arr
        for j in range(-k, 0):
            c[j + k, : min(-j, c.shape[1])] = 0.0
        return cls(c, t)

    def band(self, j: int) -> np.ndarray:
        if abs(j) > self.k:
            return np.zeros_like(self.coeff[0])
        return self.coeff[j + self.k]

    def get(self, j: int, n: int) -> np.ndarray:
        if n < 0 or n + j < 0 or abs(j) > self.k:
            return np.zeros((self.size, self.size), dtype=complex)
        if n > self.nmax:
            return np.full((self.size, self.size), np.nan, dtype=complex)
        return self.coeff[j + self.k, n]

    def available(self, j: int, n: int) -> bool:
        return not np.isnan(self.get(j, n)).any()

    def shifted(self, j: int, shift: int, length: Optional[int] = None) -> np.ndarray:
        """Array ``X`` with ``X[n] = G_j(n + shift)`` for ``0 <= n < length``."""
        length = self.nmax + 1 if length is None else length
        out = np.zeros((length, self.size, self.size), dtype=complex)
        if abs(j) > self.k:
            return out
        src = self.coeff[j + self.k]
        lo = max(0, -shift)
        hi = min(length, self.nmax + 1 - shift)
        if hi > lo:
            out[lo:hi] = src[lo + shift: hi + shift]
        out[max(lo, hi, 0):] = np.nan
        return out

    def availability(self) -> np.ndarray:
        """Boolean mask ``(2k+1, nmax+1)``."""
        return ~np.isnan(self.coeff).any(axis=(-1, -2))

    def window(self) -> int:
        """Largest ``n_top`` such that every band is available for all ``n <= n_top`` (-1 if none)."""
        ok = self.availability().all(axis=0)
        bad = np.nonzero(~ok)[0]
        return int(bad[0]) - 1 if bad.size else self.nmax

    def with_coeff(self, coeff: np.ndarray, t: Optional[float] = None) -> "BandedDifferenceOperator":
        return BandedDifferenceOperator(coeff, self.t if t is None else t)

    def truncated(self, nmax: int) -> "BandedDifferenceOperator":
        return self.with_coeff(self.coeff[:, : nmax + 1].copy())

    def to_dict(self) -> dict:
        entries = []
        for j in range(-self.k, self.k + 1):
            for n in range(self.nmax + 1):
                g = self.coeff[j + self.k, n]
                if not np.isnan(g).any():
                    entries.append({"j": j, "n": n, "re": g.real.tolist(), "im": g.imag.tolist()})
        return {"t": self.t, "bandwidth": self.k, "nmax": self.nmax, "size": self.size,
                "entries": entries}


def compute_g(fam: MvopFamily, lam: MatrixPolynomial, rule: Optional[QuadratureRule] = None,
              check: bool = True) -> BandedDifferenceOperator:
    """Band coefficients ``G_j(n;t) = <P_n Lambda, P_{n+j}>_t H_{n+j}^{-1}``.

    With ``check`` the weak Pearson relation and the constancy of the top band
    are verified; a residual above ``1e-7`` raises :class:`ConsistencyError`
    (``Lambda`` is not symmetric for the weight, or the quadrature is too
    coarse).
    """
    if lam.size != fam.size:
        raise DimensionError("symbol and family sizes differ")
    k = lam.degree
    if fam.nmax < k:
        raise ParameterError(f"nmax={fam.nmax} is smaller than the bandwidth {k}")
    rule = rule or fam.rule
    pv = fam.node_values(rule)
    plam = pv @ lam(rule.nodes)[None]
    prods = np.einsum("k,nkab,kbc,mkdc->nmad", rule.weights, plam, fam.weight_values(rule),
                      np.conj(pv), optimize=True)

    op = BandedDifferenceOperator.empty(k, fam.nmax, fam.size, fam.t)
    for n in range(fam.nmax + 1):
        for j in range(-k, k + 1):
            m = n + j
            if 0 <= m <= fam.nmax:
                op.coeff[j + k, n] = right_divide(prods[n, m], fam.norms[m])
    if check:
        res = weak_pearson_residual(op, fam.norms)
        if res > PEARSON_RAISE:
            raise ConsistencyError(f"weak Pearson residual {res:.2e} exceeds {PEARSON_RAISE:.0e}")
        lead = leading_band_residual(op, lam)
        if lead > PEARSON_RAISE:
            raise ConsistencyError(f"top band deviates from the leading coefficient by {lead:.2e}")
    return op


def weak_pearson_residual(op: BandedDifferenceOperator, norms) -> float:
    """``max |G_l(n) H_{n+l} - H_n G_{-l}(n+l)^*| / |H_n|`` over available entries."""
    norms = np.asarray(norms)
    nmax = min(op.nmax, len(norms) - 1)
    worst = 0.0
    for n in range(nmax + 1):
        scale = max_norm(norms[n])
        for l in range(-op.k, op.k + 1):
            m = n + l
            if m < 0 or m > nmax:
                continue
            lhs = op.get(l, n) @ norms[m]
            rhs = norms[n] @ dagger(op.get(-l, m))
            if np.isnan(lhs).any() or np.isnan(rhs).any():
                continue
            worst = max(worst, max_norm(lhs - rhs) / scale)
    return worst


def leading_band_residual(op: BandedDifferenceOperator, lam: MatrixPolynomial) -> float:
    top = op.band(op.k)
    mask = ~np.isnan(top).any(axis=(-1, -2))
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(top[mask] - lam.leading))) / max(max_norm(lam.leading), 1e-300)


def apply(op: BandedDifferenceOperator, fam: MvopFamily, n: int) -> MatrixPolynomial:
    """``sum_j G_j(n) P_{n+j}`` as a matrix polynomial of degree ``n + k``."""
    if not 0 <= n <= fam.nmax - op.k:
        raise ParameterError(f"n={n} outside [0, {fam.nmax - op.k}]")
    out = MatrixPolynomial.constant(np.zeros((fam.size, fam.size)))
    for j in range(-op.k, op.k + 1):
        if n + j >= 0:
            out = out + op.get(j, n) @ fam.polys[n + j]
    return out


def compose(a: BandedDifferenceOperator, b: BandedDifferenceOperator) -> BandedDifferenceOperator:
    """Operator for the symbol product ``Lambda_a Lambda_b``.

    ``(a*b)_l(n) = sum_{j+i=l} a_j(n) b_i(n+j)``: a sum over two-step paths
    ``n -> n+j -> n+l`` with arrow coefficients multiplied in path order.
    """
    if a.size != b.size:
        raise DimensionError("operator sizes differ")
    nmax = min(a.nmax, b.nmax)
    k = a.k + b.k
    out = np.zeros((2 * k + 1, nmax + 1, a.size, a.size), dtype=complex)
    for j in range(-a.k, a.k + 1):
        aj = a.shifted(j, 0, nmax + 1)
        for i in range(-b.k, b.k + 1):
            out[j + i + k] += aj @ b.shifted(i, j, nmax + 1)
    for l in range(-k, 0):
        out[l + k, : min(-l, nmax + 1)] = 0.0
    return BandedDifferenceOperator(out, a.t)


def identity_operator(nmax: int, size: int, t: float = 0.0) -> BandedDifferenceOperator:
    c = np.broadcast_to(np.eye(size, dtype=complex), (1, nmax + 1, size, size)).copy()
    return BandedDifferenceOperator(c, t)


def add(a: BandedDifferenceOperator, b: BandedDifferenceOperator, scale_b: complex = 1.0):
    """``a + scale_b * b`` with bands padded to the wider operator."""
    nmax = min(a.nmax, b.nmax)
    k = max(a.k, b.k)
    out = np.zeros((2 * k + 1, nmax + 1, a.size, a.size), dtype=complex)
    out[k - a.k: k + a.k + 1] += a.coeff[:, : nmax + 1]
    out[k - b.k: k + b.k + 1] += scale_b * b.coeff[:, : nmax + 1]
    return BandedDifferenceOperator(out, a.t)


def polynomial_of(op: BandedDifferenceOperator, v_coeffs: Sequence[float]) -> BandedDifferenceOperator:
    """``sum_j v_j M^j`` for a banded operator of any bandwidth."""
    v = [float(c) for c in v_coeffs]
    if not v:
        raise ParameterError("v_coeffs must be nonempty")
    while len(v) > 1 and v[-1] == 0.0:
        v.pop()
    power = identity_operator(op.nmax, op.size, op.t)
    total = BandedDifferenceOperator(np.zeros_like(power.coeff), op.t)
    for j, c in enumerate(v):
        if j:
            power = compose(power, op)
        # zero coefficients are skipped so their unavailable entries do not leak in
        if c != 0.0:
            total = add(total, power, c)
    return total


def compose_vm(op: BandedDifferenceOperator, v_coeffs: Sequence[float]) -> BandedDifferenceOperator:
    """``v(M_Lambda)`` for a three-term operator ``M_Lambda`` (path scheme)."""
    if op.k != 1:
        raise ContractError(f"compose_vm needs a bandwidth-1 operator, got bandwidth {op.k}")
    return polynomial_of(op, v_coeffs)
