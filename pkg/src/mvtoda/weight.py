"""Matrix weights and their deformation ``W(x;t) = exp(-t Lambda(x)) W(x)``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .linalg import dagger, mat_exp
from .polynomial import MatrixPolynomial

SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """A matrix weight together with the symbol ``Lambda`` that deforms it.

    ``base`` maps an array of points of shape ``(m,)`` to the base weight at
    those points, shape ``(m, N, N)``.  When ``gaussian`` is set the support
    is the real line and ``base`` is the *reduced* weight: the scalar factor
    ``exp(-x**2)`` is left out and supplied by a Gauss-Hermite rule.

    By default the deformation exponent at time ``t`` is ``t * Lambda``.  If
    ``flow`` is given it must return polynomial coefficients ``v_0, v_1, ...``
    at time ``t`` and the exponent becomes ``v(Lambda(x); t)``.
    """

    size: int
    base: Callable[[np.ndarray], np.ndarray]
    deformation: MatrixPolynomial
    support: tuple = (-math.inf, math.inf)
    gaussian: bool = True
    description: str = ""
    base_degree: Optional[int] = None
    flow: Optional[Callable[[float], Sequence[float]]] = field(default=None)

    def __post_init__(self):
        if self.deformation.size != self.size:
            raise DimensionError(f"deformation is {self.deformation.size}x{self.deformation.size}, "
                                 f"weight is {self.size}x{self.size}")
        a, b = self.support
        if not a < b:
            raise ParameterError(f"empty support {self.support}")
        if self.gaussian and (math.isfinite(a) or math.isfinite(b)):
            raise ParameterError("a Gaussian-reduced weight must be supported on the whole real line")

    def exponent(self, t: float) -> MatrixPolynomial:
        if self.flow is None:
            return t * self.deformation
        return compose_v_of_lambda(self.deformation, self.flow(t))

    @property
    def exponent_degree(self) -> int:
        if self.flow is None:
            return self.deformation.degree
        return self.deformation.degree * (len(self.flow(0.0)) - 1)

    def base_at(self, x) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.asarray(self.base(xs), dtype=complex)
        if out.shape != (len(xs), self.size, self.size):
            raise DimensionError(f"base weight returned shape {out.shape}")
        return out

    def with_deformation(self, lam: MatrixPolynomial, description: Optional[str] = None) -> "WeightSpec":
        return replace(self, deformation=lam, flow=None,
                       description=description if description is not None else self.description)

    def with_flow(self, lam: MatrixPolynomial, flow, description: Optional[str] = None) -> "WeightSpec":
        """Weight deformed by ``exp(-v(lam(x); t))`` with ``v`` given by ``flow``."""
        return replace(self, deformation=lam, flow=flow,
                       description=description if description is not None else self.description)


def eval_weight(w: WeightSpec, x, t: float, full: bool = False) -> np.ndarray:
    """``exp(-t Lambda(x)) W(x)`` at ``x`` (scalar or 1-d array).

    For Gaussian-reduced weights the ``exp(-x**2)`` factor is omitted unless
    ``full`` is set.
    """
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    a, b = w.support
    if np.any(xs < a) or np.any(xs > b) or np.any(np.isnan(xs)):
        raise DomainError(f"points outside the support [{a}, {b}]")
    base = w.base_at(xs)
    expo = w.exponent(t)
    if expo.is_zero():
        out = base
    else:
        out = mat_exp(-expo(xs)) @ base
    if full and w.gaussian:
        out = out * np.exp(-xs**2)[:, None, None]
    return out[0] if scalar else out


def default_sample_points(w: WeightSpec, count: int = 21) -> np.ndarray:
    """Chebyshev points on ``[-4, 4]``, or on the support when it is finite."""
    a, b = w.support
    if not (math.isfinite(a) and math.isfinite(b)):
        a, b = -4.0, 4.0
    k = np.arange(count)
    pts = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * (2 * k + 1) / (2 * count))
    return np.sort(pts)


@dataclass
class SymmetryReport:
    max_residual: float
    residual_t0: float
    passed: bool
    closure_ok: bool
    t: float

    def to_dict(self):
        return {"max_residual": self.max_residual, "residual_t0": self.residual_t0,
                "passed": self.passed, "closure_ok": self.closure_ok, "t": self.t}


def _symmetry_residual(lam, w, t, xs):
    wt = eval_weight(w, xs, t)
    lx = lam(xs)
    res = lx @ wt - wt @ dagger(lx)
    num = np.max(np.abs(res), axis=(-1, -2))
    den = np.maximum(np.max(np.abs(wt), axis=(-1, -2)), np.finfo(float).tiny)
    return float(np.max(num / den))


def check_zero_order_symmetry(lam: MatrixPolynomial, w: WeightSpec, t: float = 0.0,
                              sample_xs=None, tol: float = SYMMETRY_TOL) -> SymmetryReport:
    """Sampled check of ``Lambda(x) W(x;t) = W(x;t) Lambda(x)^*``.

    The residual is taken relative to ``max|W(x;t)|`` at each point.  The check
    is run at ``t = 0`` as well: symmetry there must carry over to ``t``.
    """
    if lam.size != w.size:
        raise DimensionError("symbol and weight sizes differ")
    xs = default_sample_points(w) if sample_xs is None else np.asarray(sample_xs, dtype=float)
    r0 = _symmetry_residual(lam, w, 0.0, xs)
    rt = r0 if t == 0 else _symmetry_residual(lam, w, t, xs)
    closure_ok = rt <= tol or r0 > tol
    return SymmetryReport(max_residual=rt, residual_t0=r0, passed=rt <= tol and closure_ok,
                          closure_ok=closure_ok, t=t)


def compose_v_of_lambda(lam: MatrixPolynomial, v_coeffs: Sequence[float]) -> MatrixPolynomial:
    """``sum_j v_j Lambda(x)**j`` as a matrix polynomial (Horner in ``Lambda``)."""
    v = [float(c) for c in v_coeffs]
    if not v:
        raise ParameterError("v_coeffs must be nonempty")
    eye = np.eye(lam.size)
    out = MatrixPolynomial.constant(v[-1] * eye)
    for c in reversed(v[:-1]):
        out = out @ lam + MatrixPolynomial.constant(c * eye)
    return out


def scalar_times_identity(n: int, coeffs: Sequence[float]) -> MatrixPolynomial:
    """``(sum_k c_k x**k) I`` for real ``c_k``."""
    eye = np.eye(n)
    return MatrixPolynomial(np.array([c * eye for c in coeffs]))

