"""Named weights, symbols and closed-form lattice states."""
from __future__ import annotations

import numpy as np

from .diffop import BandedDifferenceOperator
from .errors import ParameterError
from .hermite import HermiteParams, casimir, closed_form_operator2x2, hermite_weight
from .polynomial import MatrixPolynomial
from .toda import LatticeState
from .weight import WeightSpec, scalar_times_identity

PRESETS = ("hermite2", "hermiteN", "scalar", "scalar-x2")
DEFORMATIONS = ("casimir", "x", "x2")


def symbol(name: str, size: int, params: HermiteParams | None = None) -> MatrixPolynomial:
    """``casimir`` (needs Hermite parameters), ``x`` or ``x2`` times the identity."""
    if name == "x":
        return scalar_times_identity(size, [0.0, 1.0])
    if name == "x2":
        return scalar_times_identity(size, [0.0, 0.0, 1.0])
    if name == "casimir":
        if params is None:
            raise ParameterError("the casimir symbol needs a Hermite-type weight")
        return casimir(params)
    raise ParameterError(f"unknown deformation {name!r}; expected one of {DEFORMATIONS}")


def scalar_weight(deformation: str = "x") -> WeightSpec:
    """``exp(-x^2)`` with the given deformation symbol."""
    return WeightSpec(size=1, base=lambda xs: np.ones((len(xs), 1, 1)), deformation=symbol(deformation, 1),
                      base_degree=0, description=f"scalar hermite, deformation {deformation}")


def preset(name: str, a=None, deformation: str | None = None) -> tuple[WeightSpec, HermiteParams | None]:
    """Weight for a preset name and its Hermite parameters (``None`` for scalar presets)."""
    if name == "hermite2":
        p = HermiteParams((1.0,) if a is None else tuple(np.atleast_1d(a))[:1])
    elif name == "hermiteN":
        p = HermiteParams((1.0, 1.0) if a is None else tuple(np.atleast_1d(a)))
    elif name == "scalar":
        return scalar_weight(deformation or "x"), None
    elif name == "scalar-x2":
        return scalar_weight(deformation or "x2"), None
    else:
        raise ParameterError(f"unknown preset {name!r}; expected one of {PRESETS}")
    w = hermite_weight(p)
    if deformation not in (None, "casimir"):
        w = w.with_deformation(symbol(deformation, p.N))
    return w, p


def scalar_x_operator(nmax: int, t: float) -> BandedDifferenceOperator:
    """``exp(-tx) exp(-x^2)``: ``G_1 = 1``, ``B(n) = -t/2``, ``C(n) = n/2``."""
    n = np.arange(nmax + 1, dtype=float)
    one = np.ones((nmax + 1, 1, 1))
    return BandedDifferenceOperator.from_bands({1: one, 0: -0.5 * t * one, -1: (0.5 * n)[:, None, None]}, t)


def scalar_x2_recurrence(n, t: float):
    """``C(n;t) = n / (2 (1 + t))`` for ``exp(-t x^2) exp(-x^2)``."""
    if t <= -1:
        raise ParameterError("the weight exp(-(1+t) x^2) needs t > -1")
    return np.asarray(n, dtype=float) / (2.0 * (1.0 + t))


def scalar_x2_operator(nmax: int, t: float) -> BandedDifferenceOperator:
    """Bands of ``x^2`` for ``exp(-t x^2) exp(-x^2)``: ``G_0 = C(n) + C(n+1)``, ``G_{-2} = C(n) C(n-1)``."""
    n = np.arange(nmax + 1, dtype=float)
    c = scalar_x2_recurrence(n, t)
    cp = scalar_x2_recurrence(n + 1, t)
    cm = scalar_x2_recurrence(np.maximum(n - 1, 0), t)
    col = lambda v: np.asarray(v, dtype=float)[:, None, None]  # noqa: E731
    zero = np.zeros((nmax + 1, 1, 1))
    return BandedDifferenceOperator.from_bands(
        {2: col(np.ones(nmax + 1)), 1: zero, 0: col(c + cp), -1: zero, -2: col(c * cm)}, t)


def closed_form_state(name: str, nmax: int, t: float, a: float = 1.0) -> LatticeState:
    """Lattice state with every band available up to ``nmax`` (no norms).

    Seeding from a closed form keeps long RK4 runs clear of the shrinking
    window that a quadrature-built state would run into.
    """
    if name == "hermite2":
        op = closed_form_operator2x2(nmax, t, a)
    elif name == "scalar":
        op = scalar_x_operator(nmax, t)
    elif name == "scalar-x2":
        op = scalar_x2_operator(nmax, t)
    else:
        raise ParameterError(f"no closed-form state for preset {name!r}")
    return LatticeState(t, op, None)
