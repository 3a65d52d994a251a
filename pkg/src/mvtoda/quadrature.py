"""Quadrature rules for the matrix inner product.

A rule integrates against a *reference measure*: ``exp(-x**2) dx`` on the real
line for Gauss-Hermite, Lebesgue measure on ``[a, b]`` for composite
Gauss-Legendre.  Integrands handed to a Gauss-Hermite rule therefore have the
Gaussian factor removed.

Each rule also knows the three-term recurrence of the orthonormal polynomials
of its reference measure.  The family construction in :mod:`mvtoda.mvop` uses
that basis to keep its Gram systems well conditioned.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite, legendre
from scipy.special import roots_hermite

from .errors import DimensionError, ParameterError

MAX_POINTS = 500


class Scheme(str, enum.Enum):
    GAUSS_HERMITE = "gauss-hermite"
    COMPOSITE_GAUSS_LEGENDRE = "composite-gauss-legendre"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    scheme: Scheme
    exact_degree: int
    support: tuple = (-math.inf, math.inf)
    points_per_panel: int = 0
    panels: int = 1
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise DimensionError("nodes and weights differ in length")

    @property
    def npoints(self) -> int:
        return len(self.nodes)

    @property
    def gaussian(self) -> bool:
        return self.scheme is Scheme.GAUSS_HERMITE

    @property
    def total_mass(self) -> float:
        """Exact integral of the reference measure."""
        if self.gaussian:
            return math.sqrt(math.pi)
        a, b = self.support
        return b - a

    def refined(self) -> "QuadratureRule":
        """Same scheme with twice the number of nodes."""
        if self.gaussian:
            return _gauss_hermite(2 * self.npoints)
        a, b = self.support
        return make_composite_gauss_legendre(a, b, self.points_per_panel, 2 * self.panels, _check=False)

    def reference_recurrence(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Recurrence coefficients ``alpha[0..n]``, ``beta[0..n]`` of the reference measure.

        ``beta[0]`` is the total mass, so ``phi_0 = beta[0] ** -0.5``.
        """
        j = np.arange(n + 1, dtype=float)
        if self.gaussian:
            alpha = np.zeros(n + 1)
            beta = j / 2.0
        else:
            a, b = self.support
            half = 0.5 * (b - a)
            alpha = np.full(n + 1, 0.5 * (a + b))
            with np.errstate(divide="ignore", invalid="ignore"):
                beta = half**2 * j**2 / (4.0 * j**2 - 1.0)
        beta[0] = self.total_mass
        return alpha, beta

    def basis(self, nmax: int, xs=None) -> np.ndarray:
        """Orthonormal reference polynomials ``phi_0..phi_nmax`` at ``xs`` (default: nodes).

        Returns shape ``(nmax + 1, len(xs))``.
        """
        if xs is None:
            key = ("basis", nmax)
            if key not in self._cache:
                self._cache[key] = self._basis_values(nmax, self.nodes)
            return self._cache[key]
        return self._basis_values(nmax, np.atleast_1d(np.asarray(xs, dtype=float)))

    def _basis_values(self, nmax, xs):
        alpha, beta = self.reference_recurrence(nmax + 1)
        sb = np.sqrt(beta)
        out = np.empty((nmax + 1, len(xs)))
        out[0] = 1.0 / sb[0]
        if nmax >= 1:
            out[1] = (xs - alpha[0]) * out[0] / sb[1]
        for j in range(1, nmax):
            out[j + 1] = ((xs - alpha[j]) * out[j] - sb[j] * out[j - 1]) / sb[j + 1]
        return out

    def basis_monomial(self, nmax: int) -> np.ndarray:
        """Monomial coefficients ``C[j, p]`` of ``phi_j`` (coefficient of ``x**p``)."""
        alpha, beta = self.reference_recurrence(nmax + 1)
        sb = np.sqrt(beta)
        c = np.zeros((nmax + 1, nmax + 1))
        c[0, 0] = 1.0 / sb[0]
        for j in range(nmax):
            nxt = np.zeros(nmax + 1)
            nxt[1:] += c[j, :-1]
            nxt -= alpha[j] * c[j]
            if j >= 1:
                nxt -= sb[j] * c[j - 1]
            c[j + 1] = nxt / sb[j + 1]
        return c

    def leading(self, nmax: int) -> np.ndarray:
        """Leading coefficients ``kappa_j`` of ``phi_j``."""
        _, beta = self.reference_recurrence(nmax + 1)
        sb = np.sqrt(beta)
        kappa = np.empty(nmax + 1)
        kappa[0] = 1.0 / sb[0]
        for j in range(nmax):
            kappa[j + 1] = kappa[j] / sb[j + 1]
        return kappa


def _gauss_hermite(npoints: int) -> QuadratureRule:
    # numpy's hermgauss overflows to NaN for large rules; scipy switches to asymptotics there
    if npoints <= 150:
        x, w = hermite.hermgauss(npoints)
    else:
        x, w = roots_hermite(npoints)
    order = np.argsort(x)
    return QuadratureRule(
        nodes=x[order], weights=w[order], scheme=Scheme.GAUSS_HERMITE,
        exact_degree=2 * npoints - 1,
    )


def make_gauss_hermite(npoints: int) -> QuadratureRule:
    """Gauss-Hermite rule with ``npoints`` nodes for the weight ``exp(-x**2)``."""
    if not (isinstance(npoints, (int, np.integer)) and 1 <= npoints <= MAX_POINTS):
        raise ParameterError(f"npoints must be an integer in [1, {MAX_POINTS}], got {npoints!r}")
    return _gauss_hermite(int(npoints))


def make_composite_gauss_legendre(a: float, b: float, npoints: int, panels: int = 1,
                                  _check: bool = True) -> QuadratureRule:
    """Gauss-Legendre with ``npoints`` nodes on each of ``panels`` equal panels of ``[a, b]``."""
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ParameterError(f"composite Gauss-Legendre needs a finite interval a < b, got [{a}, {b}]")
    if panels < 1:
        raise ParameterError("panels must be >= 1")
    if _check and not (1 <= npoints <= MAX_POINTS):
        raise ParameterError(f"npoints must be in [1, {MAX_POINTS}], got {npoints}")
    x, w = legendre.leggauss(npoints)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureRule(
        nodes=nodes, weights=weights, scheme=Scheme.COMPOSITE_GAUSS_LEGENDRE,
        exact_degree=2 * npoints - 1, support=(float(a), float(b)),
        points_per_panel=npoints, panels=panels,
    )


def default_npoints(nmax: int, bandwidth: int) -> int:
    """Node count used when the caller does not choose one.

    Polynomial integrands need ``nmax + bandwidth + 5``; the extra headroom
    covers the non-polynomial factor ``exp(-t*Lambda(x))`` of scalar
    deformations, which Gauss-Hermite integrates only to spectral accuracy.
    """
    return min(MAX_POINTS, max(nmax + bandwidth + 5, 4 * (nmax + bandwidth) + 40))


def integrate_matrix(f, rule: QuadratureRule, gaussian_factor_included: bool = False) -> np.ndarray:
    """``sum_i w_i f(x_i)`` for a matrix-valued ``f``.

    For a Gauss-Hermite rule ``f`` is expected without the ``exp(-x**2)``
    factor.  Pass ``gaussian_factor_included=True`` if ``f`` carries it; it is
    then divided out at the nodes.
    """
    values = [np.asarray(f(x), dtype=complex) for x in rule.nodes]
    shape = values[0].shape
    for v in values:
        if v.shape != shape:
            raise DimensionError(f"integrand changes shape: {shape} vs {v.shape}")
    vals = np.stack(values)
    w = rule.weights
    if gaussian_factor_included and rule.gaussian:
        w = w * np.exp(rule.nodes**2)
    return np.tensordot(w, vals, axes=(0, 0))
