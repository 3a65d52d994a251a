"""Monic matrix-valued orthogonal polynomials of a deformed weight.

The polynomials are obtained degree by degree from the block Gram system
``<P_n, phi_j I>_t = 0`` for ``j < n``.  By default ``phi_j`` are the
orthonormal polynomials of the quadrature rule's reference measure (modified
moments); ``method="monomial"`` uses plain moments ``int x**m W(x;t)`` and the
block Hankel matrix instead, which is simpler but loses about ten digits by
``n = 12``.

The inner product is ``<P, Q>_t = int P(x) W(x;t) Q(x)^* dmu(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IllConditionedError, ParameterError, QuadratureAccuracyError, SingularMatrixError
from .linalg import dagger, is_positive_definite, max_norm, rel_diff, right_divide
from .polynomial import MatrixPolynomial
from .quadrature import QuadratureRule, default_npoints, make_composite_gauss_legendre, make_gauss_hermite
from .weight import WeightSpec, eval_weight

MOMENT_TOL = 1e-10
COND_LIMIT = 1e13
NMAX_DEFAULT = 12


def default_rule(w: WeightSpec, nmax: int, bandwidth: int = 1, npoints: Optional[int] = None,
                 panels: int = 8) -> QuadratureRule:
    """Gauss-Hermite for Gaussian-reduced weights, composite Gauss-Legendre otherwise."""
    if npoints is None:
        npoints = default_npoints(nmax, bandwidth + (w.base_degree or 0))
    if w.gaussian:
        return make_gauss_hermite(npoints)
    a, b = w.support
    return make_composite_gauss_legendre(a, b, min(npoints, 64), panels)


def inner(pv: np.ndarray, qv: np.ndarray, wv: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Quadrature sum ``sum_k w_k P(x_k) W(x_k) Q(x_k)^*``.

    ``pv`` and ``qv`` are node values with shape ``(..., m, N, N)``; leading
    axes broadcast.
    """
    return np.einsum("k,...kab,kbc,...kdc->...ad", weights, pv, wv, np.conj(qv), optimize=True)


@dataclass(frozen=True, eq=False)
class MvopFamily:
    """Monic polynomials ``P_0..P_nmax`` with norms and recurrence coefficients.

    ``recur_B[n]`` and ``recur_C[n]`` are ``B(n)`` and ``C(n)`` for
    ``0 <= n <= nmax`` with ``C(0) = 0``.
    """

    weight: WeightSpec
    t: float
    nmax: int
    rule: QuadratureRule
    polys: list
    norms: np.ndarray
    recur_B: np.ndarray
    recur_C: np.ndarray
    basis_coeffs: Optional[np.ndarray] = None
    method: str = "orthonormal"
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.weight.size

    def weight_values(self, rule: Optional[QuadratureRule] = None) -> np.ndarray:
        rule = rule or self.rule
        key = ("w", id(rule))
        if key not in self._cache:
            self._cache[key] = eval_weight(self.weight, rule.nodes, self.t)
        return self._cache[key]

    def evaluate(self, xs) -> np.ndarray:
        """``P_n(x)`` for all ``n``; shape ``(nmax + 1, len(xs), N, N)``."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        if self.basis_coeffs is None:
            return np.stack([p(xs) for p in self.polys])
        phi = self.rule.basis(self.nmax, xs)
        return np.einsum("njab,jm->nmab", self.basis_coeffs, phi)

    def node_values(self, rule: Optional[QuadratureRule] = None) -> np.ndarray:
        rule = rule or self.rule
        key = ("p", id(rule))
        if key not in self._cache:
            if rule is self.rule and self.basis_coeffs is not None:
                phi = rule.basis(self.nmax)
                self._cache[key] = np.einsum("njab,jm->nmab", self.basis_coeffs, phi)
            else:
                self._cache[key] = self.evaluate(rule.nodes)
        return self._cache[key]

    def inner(self, pv, qv, rule: Optional[QuadratureRule] = None) -> np.ndarray:
        rule = rule or self.rule
        return inner(pv, qv, self.weight_values(rule), rule.weights)

    def gram(self) -> np.ndarray:
        """All inner products ``<P_n, P_m>_t``; shape ``(nmax+1, nmax+1, N, N)``."""
        pv = self.node_values()
        return np.einsum("k,nkab,kbc,mkdc->nmad", self.rule.weights, pv, self.weight_values(),
                         np.conj(pv), optimize=True)


def compute_moments(w: WeightSpec, t: float, max_power: int, rule: QuadratureRule,
                    check: bool = True) -> list:
    """Signed moments ``int x**m W(x;t) dmu`` for ``m = 0..max_power``.

    With ``check`` the moments are recomputed on a rule with twice the nodes and
    :class:`QuadratureAccuracyError` is raised if any changes by more than
    ``1e-10`` relative to its size.
    """
    def moments(r):
        wv = eval_weight(w, r.nodes, t)
        powers = r.nodes[None, :] ** np.arange(max_power + 1)[:, None]
        return np.einsum("k,mk,kab->mab", r.weights, powers, wv)

    mu = moments(rule)
    if check:
        fine = moments(rule.refined())
        for m in range(max_power + 1):
            err = rel_diff(mu[m], fine[m], floor=max_norm(fine[0]))
            if err > MOMENT_TOL:
                raise QuadratureAccuracyError(
                    f"moment {m} changes by {err:.2e} when the rule is refined "
                    f"({rule.npoints} -> {2 * rule.npoints} nodes)")
    return list(mu)


def _solve_gram(gram_blocks: np.ndarray, rhs_blocks: np.ndarray, n: int) -> np.ndarray:
    """Solve ``sum_j D_j G[j, i] = -R[i]`` for ``i < n``; returns ``D`` with shape ``(n, N, N)``."""
    size = gram_blocks.shape[-1]
    big = gram_blocks.transpose(0, 2, 1, 3).reshape(n * size, n * size)
    rhs = rhs_blocks.transpose(1, 0, 2).reshape(size, n * size)
    cond = np.linalg.cond(big)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(n, f"condition number {cond:.2e}")
    try:
        d = right_divide(-rhs, big)
    except SingularMatrixError as exc:
        raise IllConditionedError(n, str(exc)) from exc
    return d.reshape(size, n, size).transpose(1, 0, 2)


def build_family(w: WeightSpec, t: float, nmax: int = NMAX_DEFAULT, rule: Optional[QuadratureRule] = None,
                 method: str = "orthonormal") -> MvopFamily:
    """Monic MVOPs ``P_0..P_nmax`` for ``W(x;t)``.

    Raises :class:`IllConditionedError` naming the first degree whose block
    Gram system cannot be solved reliably.
    """
    if nmax < 0:
        raise ParameterError("nmax must be >= 0")
    if rule is None:
        rule = default_rule(w, nmax, w.exponent_degree)
    size = w.size
    eye = np.eye(size, dtype=complex)
    wv = eval_weight(w, rule.nodes, t)

    if method == "orthonormal":
        phi = rule.basis(nmax)
        kappa = rule.leading(nmax)
        mono = rule.basis_monomial(nmax)
        gram = np.einsum("k,ik,jk,kab->ijab", rule.weights, phi, phi, wv, optimize=True)
    elif method == "monomial":
        mu = np.asarray(compute_moments(w, t, 2 * nmax, rule, check=False))
        idx = np.arange(nmax + 1)
        gram = mu[idx[:, None] + idx[None, :]]
        kappa = np.ones(nmax + 1)
        mono = np.eye(nmax + 1)
    else:
        raise ParameterError(f"unknown method {method!r}")

    bc = np.zeros((nmax + 1, nmax + 1, size, size), dtype=complex)
    norms = np.empty((nmax + 1, size, size), dtype=complex)
    polys = []
    for n in range(nmax + 1):
        e = np.zeros((n + 1, size, size), dtype=complex)
        e[n] = eye
        if n:
            e[:n] = _solve_gram(gram[:n, :n], gram[n, :n], n)
        bc[n, : n + 1] = e / kappa[n]
        norms[n] = np.einsum("jab,jbc->ac", bc[n, : n + 1], gram[: n + 1, n]) / kappa[n]
        coeffs = np.einsum("jab,jp->pab", bc[n, : n + 1], mono[: n + 1, : n + 1])
        coeffs[n] = eye
        polys.append(MatrixPolynomial(coeffs))

    fam = MvopFamily(weight=w, t=t, nmax=nmax, rule=rule, polys=polys, norms=norms,
                     recur_B=np.zeros_like(norms), recur_C=np.zeros_like(norms),
                     basis_coeffs=bc if method == "orthonormal" else None, method=method)
    b, c = recurrence_coeffs(fam)
    fam.recur_B[...] = b
    fam.recur_C[...] = c
    return fam


def recurrence_coeffs(fam: MvopFamily) -> tuple[np.ndarray, np.ndarray]:
    """``B(n) = <xP_n, P_n> H_n^{-1}`` and ``C(n) = <xP_n, P_{n-1}> H_{n-1}^{-1}``."""
    pv = fam.node_values()
    xpv = pv * fam.rule.nodes[None, :, None, None]
    b = np.empty_like(fam.norms)
    c = np.zeros_like(fam.norms)
    for n in range(fam.nmax + 1):
        b[n] = right_divide(fam.inner(xpv[n], pv[n]), fam.norms[n])
        if n:
            c[n] = right_divide(fam.inner(xpv[n], pv[n - 1]), fam.norms[n - 1])
    return b, c


def orthogonality_residual(fam: MvopFamily) -> float:
    """``max_{n != m} |<P_n, P_m>| / sqrt(|H_n| |H_m|)``."""
    g = fam.gram()
    scale = np.array([max_norm(h) for h in fam.norms])
    worst = 0.0
    for n in range(fam.nmax + 1):
        for m in range(fam.nmax + 1):
            if n != m:
                worst = max(worst, max_norm(g[n, m]) / np.sqrt(scale[n] * scale[m]))
    return worst


def norm_residual(fam: MvopFamily) -> float:
    """Relative gap between stored ``H_n`` and the quadrature value of ``<P_n, P_n>``."""
    g = fam.gram()
    return max(rel_diff(fam.norms[n], g[n, n]) for n in range(fam.nmax + 1))


def recurrence_residual(fam: MvopFamily) -> float:
    """Coefficient-wise ``|x P_n - P_{n+1} - B(n) P_n - C(n) P_{n-1}|`` relative to ``|x P_n|``."""
    worst = 0.0
    for n in range(fam.nmax):
        lhs = fam.polys[n].times_x()
        rhs = fam.polys[n + 1] + fam.recur_B[n] @ fam.polys[n]
        if n:
            rhs = rhs + fam.recur_C[n] @ fam.polys[n - 1]
        worst = max(worst, lhs.max_coeff_diff(rhs) / max_norm(lhs.coeffs))
    return worst


def norms_hermitian_pd(fam: MvopFamily, tol: float = 1e-10) -> bool:
    return all(is_positive_definite(h, tol) for h in fam.norms)


def hermiticity_residual(mats) -> float:
    return max(rel_diff(m, dagger(m)) for m in mats)
