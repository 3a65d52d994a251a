"""Finite truncations of the block band matrices ``L`` and ``L+`` and the Lax bracket.

``L[i, j] = G_{j-i}(i)`` for ``|i - j| <= k``; ``L+`` keeps the blocks with
``i <= j``.  The band flow is ``dL/dt = [L, L+] = L L+ - L+ L``.  Truncating
to ``nblocks`` block rows only damages the top ``k`` rows of the bracket, so
rows ``0 .. nblocks-1-k`` (the interior) are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diffop import BandedDifferenceOperator, compute_g
from .errors import DimensionError, WindowError
from .mvop import build_family, default_rule
from .polynomial import MatrixPolynomial
from .quadrature import QuadratureRule
from .toda import FD_TOL, toda_rhs
from .weight import WeightSpec

ALGEBRA_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BlockBandMatrix:
    """Dense storage ``blocks[i, j]`` of an ``nblocks x nblocks`` matrix of ``N x N`` blocks.

    Rows in ``invalid_rows`` are NaN (truncation-affected) and excluded from
    every residual.
    """

    blocks: np.ndarray
    k: int
    invalid_rows: tuple = ()

    def __post_init__(self):
        b = self.blocks
        if b.ndim != 4 or b.shape[0] != b.shape[1] or b.shape[2] != b.shape[3]:
            raise DimensionError(f"blocks must be (nblocks, nblocks, N, N), got {b.shape}")

    @property
    def nblocks(self) -> int:
        return self.blocks.shape[0]

    @property
    def N(self) -> int:
        return self.blocks.shape[2]

    @property
    def interior(self) -> range:
        bad = set(self.invalid_rows)
        return [i for i in range(self.nblocks) if i not in bad]

    def block(self, i: int, j: int) -> np.ndarray:
        return self.blocks[i, j]

    def to_dense(self) -> np.ndarray:
        n, N = self.nblocks, self.N
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * N, n * N)

    @classmethod
    def from_dense(cls, m: np.ndarray, N: int, k: int, invalid_rows=()) -> "BlockBandMatrix":
        n = m.shape[0] // N
        return cls(m.reshape(n, N, n, N).transpose(0, 2, 1, 3).copy(), k, tuple(invalid_rows))

    def upper_part(self) -> "BlockBandMatrix":
        """Blocks with ``i <= j``; strictly lower blocks set to zero."""
        mask = np.triu(np.ones((self.nblocks, self.nblocks), dtype=bool))
        return BlockBandMatrix(np.where(mask[:, :, None, None], self.blocks, 0.0), self.k, self.invalid_rows)

    def bandwidth(self, tol: float = 0.0) -> int:
        """Largest ``|i - j|`` with a block above ``tol`` in the valid rows."""
        worst = 0
        for i in self.interior:
            for j in range(self.nblocks):
                if np.max(np.abs(self.blocks[i, j])) > tol:
                    worst = max(worst, abs(i - j))
        return worst

    def band_array(self, k: Optional[int] = None) -> np.ndarray:
        """``(2k+1, nblocks, N, N)`` array with entry ``[m + k, i] = blocks[i, i + m]``.

        Entries with ``i + m < 0`` are zero; invalid rows and ``i + m >=
        nblocks`` are NaN.
        """
        k = self.k if k is None else k
        out = np.full((2 * k + 1, self.nblocks, self.N, self.N), np.nan, dtype=complex)
        valid = set(self.interior)
        for m in range(-k, k + 1):
            for i in range(self.nblocks):
                j = i + m
                if j < 0:
                    out[m + k, i] = 0.0
                elif j < self.nblocks and i in valid:
                    out[m + k, i] = self.blocks[i, j]
        return out

    def to_dict(self) -> dict:
        """Nonzero blocks as ``{"i", "j", "re", "im"}`` records."""
        recs = []
        for i in range(self.nblocks):
            for j in range(self.nblocks):
                b = self.blocks[i, j]
                if np.isnan(b).any() or np.any(b):
                    recs.append({"i": i, "j": j, "re": b.real.tolist(), "im": b.imag.tolist()})
        return {"nblocks": self.nblocks, "N": self.N, "bandwidth": self.k,
                "invalid_rows": list(self.invalid_rows), "blocks": recs}


def assemble(op: BandedDifferenceOperator, nblocks: int) -> tuple[BlockBandMatrix, BlockBandMatrix]:
    """``(L, L+)`` truncated to ``nblocks`` block rows.

    Every row must be fully available, so ``nblocks - 1`` may not exceed the
    operator's window (``nmax - k`` for a freshly computed operator).
    """
    if nblocks < 1:
        raise WindowError("nblocks must be >= 1", 0, None)
    if nblocks - 1 > op.window():
        raise WindowError(f"nblocks={nblocks} exceeds the available rows 0..{op.window()}",
                          op.window() + 1, None)
    k, N = op.k, op.size
    blocks = np.zeros((nblocks, nblocks, N, N), dtype=complex)
    for i in range(nblocks):
        for m in range(-k, k + 1):
            j = i + m
            if 0 <= j < nblocks:
                blocks[i, j] = op.get(m, i)
    L = BlockBandMatrix(blocks, k)
    return L, L.upper_part()


def bracket(L: BlockBandMatrix, Lplus: BlockBandMatrix) -> BlockBandMatrix:
    """``L L+ - L+ L`` with the top ``k`` (truncation-affected) rows set to NaN."""
    if L.blocks.shape != Lplus.blocks.shape:
        raise DimensionError("L and L+ differ in shape")
    a, b = L.to_dense(), Lplus.to_dense()
    out = BlockBandMatrix.from_dense(a @ b - b @ a, L.N, L.k)
    bad = tuple(range(max(0, L.nblocks - L.k), L.nblocks))
    blocks = out.blocks.copy()
    blocks[list(bad)] = np.nan
    return BlockBandMatrix(blocks, L.k, bad)


def bracket_bands(L: BlockBandMatrix, Lplus: Optional[BlockBandMatrix] = None) -> BandedDifferenceOperator:
    """Bands of ``[L, L+]`` in the layout of a banded operator (NaN outside the interior)."""
    br = bracket(L, L.upper_part() if Lplus is None else Lplus)
    return BandedDifferenceOperator(br.band_array())


def algebra_residual(op: BandedDifferenceOperator, nblocks: Optional[int] = None) -> float:
    """Entrywise gap between the bracket bands and :func:`toda_rhs` on their common rows."""
    nblocks = op.window() + 1 if nblocks is None else nblocks
    L, Lp = assemble(op, nblocks)
    br = bracket_bands(L, Lp).coeff
    rhs = toda_rhs(op).coeff[:, :nblocks]
    d = np.abs(br - rhs)
    return float(np.nanmax(d)) if not np.isnan(d).all() else 0.0


@dataclass
class LaxReport:
    h: float
    nblocks: int
    max_residual: float
    algebra_residual: float
    band_preserved: bool
    threshold: float = FD_TOL

    @property
    def passed(self) -> bool:
        return (self.max_residual <= self.threshold and self.algebra_residual <= ALGEBRA_TOL
                and self.band_preserved)

    def to_dict(self) -> dict:
        return {"h": self.h, "nblocks": self.nblocks, "max_residual": self.max_residual,
                "algebra_residual": self.algebra_residual, "band_preserved": self.band_preserved,
                "threshold": self.threshold, "passed": self.passed}


def verify_lax(w: WeightSpec, lam: MatrixPolynomial, t: float = 0.0, h: float = 1e-4, nblocks: int = 10,
               rule: Optional[QuadratureRule] = None) -> LaxReport:
    """Central difference of ``L`` against ``[L, L+]`` on the interior rows."""
    if w.flow is not None or w.deformation is not lam:
        w = w.with_deformation(lam)
    k = lam.degree
    nmax = nblocks + k - 1
    rule = rule or default_rule(w, nmax, k)
    ops = [compute_g(build_family(w, s, nmax, rule), lam, rule) for s in (t - h, t, t + h)]
    Lm, _ = assemble(ops[0], nblocks)
    L0, Lp0 = assemble(ops[1], nblocks)
    Lpp, _ = assemble(ops[2], nblocks)
    br = bracket(L0, Lp0)
    fd = (Lpp.blocks - Lm.blocks) / (2 * h)
    rows = br.interior
    res = float(np.max(np.abs(fd[rows] - br.blocks[rows]))) if rows else 0.0
    scale = max(1.0, float(np.max(np.abs(L0.blocks))))
    preserved = br.bandwidth(tol=1e-12 * scale * scale) <= k
    return LaxReport(h, nblocks, res, algebra_residual(ops[1], nblocks), preserved)
