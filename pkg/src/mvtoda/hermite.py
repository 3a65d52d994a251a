"""Hermite-type matrix weights ``exp(-x**2) exp(xA) exp(xA^*)`` and their closed forms.

``A`` has the single subdiagonal ``A[j, j-1] = a_j`` and is nilpotent,
``J = diag(1, ..., N)``.  The symbol ``J - xA`` is symmetric for the weight and
deforms it as ``W(x;t) = exp(xA) exp(-tJ) exp(xA^*)`` (times the Gaussian).

Scalar Hermite polynomials here are the physicists' ``H_n`` (``H_1 = 2x``),
which is what makes ``2**n P_n`` an integer-coefficient combination in the
``2 x 2`` closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import hermite as H

from .diffop import BandedDifferenceOperator
from .errors import ParameterError
from .linalg import mat_exp, max_norm, rel_diff
from .mvop import build_family, default_rule
from .polynomial import MatrixPolynomial
from .weight import WeightSpec, eval_weight


@dataclass(frozen=True)
class HermiteParams:
    a: tuple = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in np.atleast_1d(self.a)))

    @property
    def N(self) -> int:
        return len(self.a) + 1

    @property
    def A(self) -> np.ndarray:
        m = np.zeros((self.N, self.N))
        for j, aj in enumerate(self.a, start=1):
            m[j, j - 1] = aj
        return m

    @property
    def J(self) -> np.ndarray:
        return np.diag(np.arange(1.0, self.N + 1))

    def rescaled(self, t: float) -> "HermiteParams":
        """Parameters ``exp(t/2) a``."""
        return HermiteParams(tuple(math.exp(t / 2) * v for v in self.a))


def casimir(p: HermiteParams) -> MatrixPolynomial:
    """The degree-one symbol ``J - xA`` (constant ``1`` when ``N = 1``)."""
    return MatrixPolynomial(np.array([p.J, -p.A]))


def hermite_weight(p: HermiteParams, deformation: Optional[MatrixPolynomial] = None) -> WeightSpec:
    """Gaussian-reduced weight ``exp(xA) exp(xA^*)``, deformed by the Casimir unless told otherwise."""
    A = p.A

    def base(xs):
        e = mat_exp(xs[:, None, None] * A[None])
        return e @ np.swapaxes(e, -1, -2)

    lam = casimir(p) if deformation is None else deformation
    return WeightSpec(size=p.N, base=base, deformation=lam, base_degree=2 * (p.N - 1),
                      description=f"hermite N={p.N} a={list(p.a)}")


def deformed_weight_closed(p: HermiteParams, x, t: float, full: bool = False) -> np.ndarray:
    """``exp(xA) exp(-tJ) exp(xA^*)``; the Gaussian factor is included only with ``full``."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    e = mat_exp(xs[:, None, None] * p.A[None])
    out = e @ np.diag(np.exp(-t * np.diag(p.J))) @ np.swapaxes(e, -1, -2)
    if full:
        out = out * np.exp(-xs**2)[:, None, None]
    return out[0] if scalar else out


# ------------------------------------------------------------ conjugation


@dataclass
class ConjugationReport:
    t: float
    weight_residual: float
    poly_residual: float
    recurrence_residual: float
    weight_tol: float = 1e-11
    poly_tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return (self.weight_residual <= self.weight_tol and self.poly_residual <= self.poly_tol
                and self.recurrence_residual <= self.poly_tol)

    def to_dict(self) -> dict:
        return {"t": self.t, "weight_residual": self.weight_residual, "poly_residual": self.poly_residual,
                "recurrence_residual": self.recurrence_residual, "passed": self.passed}


def rescaled_factorization_check(p: HermiteParams, t: float, sample_xs=None, nmax: int = 6,
                                 rule=None) -> ConjugationReport:
    """Compare the deformed family with the undeformed one at parameters ``exp(t/2) a``.

    Checks ``W(x;t) = D W^{(e^{t/2} a)}(x) D`` with ``D = exp(-(t/2) J)``
    pointwise, then ``P_n(x;t) = D P_n^{(e^{t/2} a)}(x) D^{-1}`` and the same
    conjugation of ``B(n)`` and ``C(n)`` from two independent family builds.
    """
    xs = np.linspace(-4, 4, 17) if sample_xs is None else np.asarray(sample_xs, dtype=float)
    q = p.rescaled(t)
    d = np.diag(np.exp(-0.5 * t * np.diag(p.J)))
    dinv = np.diag(np.exp(0.5 * t * np.diag(p.J)))
    w, wq = hermite_weight(p), hermite_weight(q)
    lhs = eval_weight(w, xs, t)
    rhs = d @ eval_weight(wq, xs, 0.0) @ d
    wres = max(rel_diff(lhs[i], rhs[i]) for i in range(len(xs)))

    rule = rule or default_rule(w, nmax, 1)
    fam = build_family(w, t, nmax, rule)
    ref = build_family(wq, 0.0, nmax, rule)
    pres = max(fam.polys[n].max_coeff_diff(d @ ref.polys[n] @ dinv) for n in range(nmax + 1))
    rres = 0.0
    for n in range(nmax + 1):
        rres = max(rres, max_norm(fam.recur_B[n] - d @ ref.recur_B[n] @ dinv),
                   max_norm(fam.recur_C[n] - d @ ref.recur_C[n] @ dinv))
    return ConjugationReport(t, wres, pres, rres)


# --------------------------------------------------------- 2 x 2 closed forms


def _sign(printed: bool) -> float:
    # the consistent form decays like exp(-t); ``printed`` flips the sign of t
    return 1.0 if printed else -1.0


def _p2x2_mats(n: int, t: float, a: float, printed: bool):
    s = math.exp(_sign(printed) * t)
    den = n * a * a + 2 * s
    m1 = np.array([[0.0, 2.0 / den], [1.0, 0.0]])
    m2 = np.array([[2 * a * a / den, 0.0], [0.0, 0.0]])
    return m1, m2


def _hermite_coeffs(n: int) -> np.ndarray:
    if n < 0:
        return np.zeros(1)
    c = np.zeros(n + 1)
    c[n] = 1.0
    return H.herm2poly(c)


def closed_form_p2x2_poly(n: int, t: float, a: float = 1.0, printed: bool = False) -> MatrixPolynomial:
    """Monic ``P_n(x;t)`` for ``N = 2`` as a matrix polynomial.

    ``2**n P_n = H_n I - n a M_1 H_{n-1} + n (n-1) M_2 H_{n-2}`` with
    ``M_1 = [[0, 2/(n a^2 + 2 e^{-t})], [1, 0]]`` and
    ``M_2 = [[2 a^2/(n a^2 + 2 e^{-t}), 0], [0, 0]]``.
    """
    if n < 0:
        raise ParameterError("n must be >= 0")
    m1, m2 = _p2x2_mats(n, t, a, printed)
    eye = np.eye(2)
    coeffs = np.zeros((n + 1, 2, 2))
    for k, c in enumerate(_hermite_coeffs(n)):
        coeffs[k] += c * eye
    if n >= 1:
        for k, c in enumerate(_hermite_coeffs(n - 1)):
            coeffs[k] -= n * a * c * m1
    if n >= 2:
        for k, c in enumerate(_hermite_coeffs(n - 2)):
            coeffs[k] += n * (n - 1) * c * m2
    return MatrixPolynomial(coeffs / 2.0**n)


def closed_form_p2x2(n: int, x, t: float, a: float = 1.0, printed: bool = False) -> np.ndarray:
    """Value of the closed-form ``P_n(x;t)`` for ``N = 2``."""
    return closed_form_p2x2_poly(n, t, a, printed)(x)


def closed_form_g2x2(n: int, t: float, a: float = 1.0, printed: bool = False):
    """``(G_1, G_0, G_{-1})`` at ``n`` for the Casimir symbol, ``N = 2``.

    ``G_1 = -A``,
    ``G_0 = diag(2(n a^2 + s)/(n a^2 + 2s), ((n+1) a^2 + 4s)/((n+1) a^2 + 2s))``,
    ``G_{-1} = [[0, -2 n a s/(n a^2 + 2s)^2], [0, 0]]`` with ``s = e^{-t}``.
    """
    if n < 0:
        raise ParameterError("n must be >= 0")
    s = math.exp(_sign(printed) * t)
    a2 = a * a
    g1 = -HermiteParams((a,)).A
    g0 = np.diag([2 * (n * a2 + s) / (n * a2 + 2 * s),
                  ((n + 1) * a2 + 4 * s) / ((n + 1) * a2 + 2 * s)])
    gm1 = np.array([[0.0, -2 * n * a * s / (n * a2 + 2 * s) ** 2], [0.0, 0.0]])
    return g1, g0, gm1


def closed_form_recurrence2x2(n: int, t: float, a: float = 1.0):
    """``(B(n), C(n))`` read off from the closed-form ``P_n``, ``P_{n+1}``, ``P_{n-1}``.

    With ``X_n, Y_n`` the ``x**(n-1)`` and ``x**(n-2)`` coefficients of ``P_n``,
    ``B(n) = X_n - X_{n+1}`` and ``C(n) = Y_n - Y_{n+1} - B(n) X_n``.
    """
    def xy(m):
        if m < 0:
            return np.zeros((2, 2)), np.zeros((2, 2))
        p = closed_form_p2x2_poly(m, t, a)
        return p.coefficient(m - 1).real, p.coefficient(m - 2).real

    xn, yn = xy(n)
    xp, yp = xy(n + 1)
    b = xn - xp
    c = yn - yp - b @ xn
    return b, c


def closed_form_norm2x2(n: int, t: float, a: float = 1.0) -> np.ndarray:
    """``H_n(t) = C(n) C(n-1) ... C(1) H_0`` with ``H_0 = sqrt(pi) e^{-t} diag(1, a^2/2 + e^{-t})``."""
    s = math.exp(-t)
    h = math.sqrt(math.pi) * s * np.diag([1.0, a * a / 2 + s])
    for m in range(1, n + 1):
        h = closed_form_recurrence2x2(m, t, a)[1] @ h
    return h


def closed_form_operator2x2(nmax: int, t: float, a: float = 1.0) -> BandedDifferenceOperator:
    """Casimir bands for ``0 <= n <= nmax``, all available (the closed form holds for every n)."""
    g = [closed_form_g2x2(n, t, a) for n in range(nmax + 1)]
    return BandedDifferenceOperator.from_bands({1: [x[0] for x in g], 0: [x[1] for x in g],
                                                -1: [x[2] for x in g]}, t)


def g_from_recurrence(B: Sequence, C: Sequence, A: np.ndarray, J: np.ndarray, n: int):
    """Casimir bands from the recurrence coefficients.

    ``G_1 = -A``, ``G_0(n) = n I + J - 2 C(n) - A B(n)``,
    ``G_{-1}(n) = C(n) A - 2 C(n) B(n-1)`` (zero for ``n = 0``).
    """
    A = np.asarray(A)
    eye = np.eye(A.shape[0])
    g0 = n * eye + np.asarray(J) - 2 * np.asarray(C[n]) - A @ np.asarray(B[n])
    gm1 = np.zeros_like(g0, dtype=complex) if n == 0 else np.asarray(C[n]) @ A - 2 * np.asarray(C[n]) @ np.asarray(B[n - 1])
    return -A, g0, gm1


def check_identity_exp(p: HermiteParams, xs, ts) -> float:
    """``max |exp(xA) exp(-tJ) exp(-xA) - exp(-t(J - xA))|`` over the grid."""
    worst = 0.0
    A, J = p.A, p.J
    for x in np.atleast_1d(xs):
        ex, emx = mat_exp(x * A), mat_exp(-x * A)
        for t in np.atleast_1d(ts):
            lhs = ex @ np.diag(np.exp(-t * np.diag(J))) @ emx
            rhs = mat_exp(-t * (J - x * A))
            worst = max(worst, rel_diff(lhs, rhs))
    return worst


__all__ = [
    "HermiteParams", "casimir", "hermite_weight", "deformed_weight_closed", "ConjugationReport",
    "rescaled_factorization_check", "closed_form_p2x2", "closed_form_p2x2_poly", "closed_form_g2x2",
    "closed_form_recurrence2x2", "closed_form_norm2x2", "closed_form_operator2x2", "g_from_recurrence",
    "check_identity_exp",
]
