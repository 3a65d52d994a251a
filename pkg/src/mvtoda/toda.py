"""Toda-type flows of the band coefficients ``G_m(n;t)`` and their validation.

For a deformation ``exp(-t Lambda)`` with ``deg Lambda = k`` the bands obey

* ``m < 0``:  ``dG_m(n) = sum_{j=-k}^{m} G_j(n) G_{m-j}(n+j) - sum_{j=0}^{k+m} G_j(n) G_{m-j}(n+j)``
* ``m >= 0``: ``dG_m(n) = sum_{j=m-k}^{-1} G_j(n) G_{m-j}(n+j) - sum_{j=m+1}^{k} G_j(n) G_{m-j}(n+j)``

and the norms obey ``dH_n = -G_0(n) H_n``.  Unavailable (NaN) inputs yield
unavailable outputs, so each evaluation shrinks the valid window by ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .diffop import BandedDifferenceOperator, compose_vm, compute_g
from .errors import ConsistencyError, ContractError, ParameterError, WindowError
from .linalg import dagger, max_norm
from .mvop import MvopFamily, build_family, default_rule
from .polynomial import MatrixPolynomial
from .quadrature import QuadratureRule
from .weight import WeightSpec

HDOT_TOL = 1e-9
HDOT_RAISE = 1e-7
FD_TOL = 5e-6
HDOT_FD_TOL = 5e-7
ORDER_BAND = (3.2, 4.8)
NOISE_FACTOR = 1e-12


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Bands (and optionally norms) at one time.

    ``norms`` may be omitted: the band flow does not involve ``H_n``, and for
    long integrations the norms of high degree overflow double precision.
    """

    t: float
    op: BandedDifferenceOperator
    norms: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return self.op.k

    @property
    def window(self) -> int:
        w = self.op.window()
        if self.norms is not None:
            bad = np.nonzero(np.isnan(self.norms).any(axis=(-1, -2)))[0]
            if bad.size:
                w = min(w, int(bad[0]) - 1)
        return w

    @classmethod
    def from_family(cls, fam: MvopFamily, lam: MatrixPolynomial, rule: Optional[QuadratureRule] = None,
                    with_norms: bool = True) -> "LatticeState":
        op = compute_g(fam, lam, rule)
        return cls(fam.t, op, fam.norms.copy() if with_norms else None)


def _rhs_coeff(op: BandedDifferenceOperator) -> np.ndarray:
    k = op.k
    length = op.nmax + 1
    out = np.zeros_like(op.coeff)
    own = {j: op.shifted(j, 0, length) for j in range(-k, k + 1)}

    def term(j, m):
        return own[j] @ op.shifted(m - j, j, length)

    for m in range(-k, k + 1):
        if m < 0:
            plus, minus = range(-k, m + 1), range(0, k + m + 1)
        else:
            plus, minus = range(m - k, 0), range(m + 1, k + 1)
        acc = out[m + k]
        for j in plus:
            acc += term(j, m)
        for j in minus:
            acc -= term(j, m)
    # the top band is constant; keep its availability pattern
    out[2 * k] = np.where(np.isnan(op.coeff[2 * k]), np.nan, 0.0)
    for m in range(-k, 0):
        out[m + k, : min(-m, length)] = 0.0
    return out


def toda_rhs(state) -> BandedDifferenceOperator:
    """Time derivatives ``dG_m(n)/dt`` as a banded operator (NaN where unavailable)."""
    op = state.op if isinstance(state, LatticeState) else state
    return op.with_coeff(_rhs_coeff(op))


def hdot_two_sided_residual(op: BandedDifferenceOperator, norms) -> float:
    """``max_n |G_0(n) H_n - H_n G_0(n)^*| / |H_n|`` over available ``n``."""
    norms = np.asarray(norms)
    worst = 0.0
    for n in range(min(op.nmax + 1, len(norms))):
        g0 = op.get(0, n)
        if np.isnan(g0).any() or np.isnan(norms[n]).any():
            continue
        worst = max(worst, max_norm(g0 @ norms[n] - norms[n] @ dagger(g0)) / max_norm(norms[n]))
    return worst


def hdot_rhs(state: LatticeState, check: bool = True) -> np.ndarray:
    """``dH_n/dt = -G_0(n) H_n``; rows with ``G_0(n)`` unavailable are NaN.

    With ``check`` the right form ``-H_n G_0(n)^*`` is compared as well and a
    relative gap above ``1e-7`` raises :class:`ConsistencyError`.
    """
    if state.norms is None:
        raise ParameterError("state carries no norms")
    norms = np.asarray(state.norms)
    length = min(state.op.nmax + 1, len(norms))
    g0 = state.op.shifted(0, 0, length)
    if check:
        res = hdot_two_sided_residual(state.op, norms)
        if res > HDOT_RAISE:
            raise ConsistencyError(f"left and right forms of dH/dt differ by {res:.2e}")
    return -(g0 @ norms[:length])


def kdot_rhs(m_lambda: BandedDifferenceOperator, vdot_coeffs: Sequence[float]):
    """Derivatives ``(dK_0(n), dK_{-1}(n))`` under the flow ``exp(-v(Lambda;t))``.

    ``vdot_coeffs`` are the coefficients of ``dv/dt`` at the current time.  The
    bands of ``dv/dt(M_Lambda)`` are formed by path composition.
    """
    if m_lambda.k != 1:
        raise ContractError(f"kdot_rhs needs a bandwidth-1 operator, got bandwidth {m_lambda.k}")
    vm = compose_vm(m_lambda, vdot_coeffs)
    length = m_lambda.nmax + 1
    K = lambda j, s: m_lambda.shifted(j, s, length)  # noqa: E731
    V = lambda j, s: vm.shifted(j, s, length)  # noqa: E731
    kdot0 = V(-1, 0) @ K(1, -1) - K(1, 0) @ V(-1, 1)
    kdotm1 = (V(-2, 0) @ K(1, -2) + V(-1, 0) @ K(0, -1)
              - K(1, 0) @ V(-2, 1) - K(0, 0) @ V(-1, 0))
    kdotm1[0] = 0.0
    return kdot0, kdotm1


def _rk4_step(coeff, dt, rhs):
    g1 = rhs(coeff)
    g2 = rhs(coeff + 0.5 * dt * g1)
    g3 = rhs(coeff + 0.5 * dt * g2)
    g4 = rhs(coeff + dt * g3)
    return coeff + dt / 6.0 * (g1 + 2 * g2 + 2 * g3 + g4)


def feasible_steps(op: BandedDifferenceOperator, steps: int) -> int:
    """Number of RK4 steps (at most ``steps``) after which the window is still nonempty.

    Runs the step on an availability surrogate (ones where available, NaN
    elsewhere) so the count matches the real integration exactly.
    """
    mask = np.where(op.availability(), 1.0, np.nan)[:, :, None, None]
    surrogate = op.with_coeff(mask.astype(complex))
    g = surrogate.coeff
    for s in range(steps):
        g = _rk4_step(g, 1e-3, lambda c: _rhs_coeff(surrogate.with_coeff(c)))
        if surrogate.with_coeff(g).window() < 0:
            return s
    return steps


def integrate(state0: LatticeState, t1: float, steps: int, check: bool = False) -> list:
    """Classical RK4 from ``state0.t`` to ``t1``; returns ``steps + 1`` states.

    Every right-hand-side evaluation can consume up to ``k`` indices at the top
    of the valid window.  If the window would be exhausted,
    :class:`WindowError` reports the largest feasible number of steps and
    horizon.
    """
    if steps < 1:
        raise ParameterError("steps must be >= 1")
    w0 = state0.window
    dt = (t1 - state0.t) / steps
    max_steps = feasible_steps(state0.op, steps) if w0 >= 0 else 0
    if max_steps < steps:
        horizon = state0.t + max_steps * dt
        raise WindowError(
            f"window n<={w0} supports at most {max_steps} steps of size {dt:.3g} "
            f"(largest feasible horizon t={horizon:.6g}); increase nmax or reduce steps",
            max_steps, horizon)

    with_h = state0.norms is not None

    def f(coeff, norms):
        op = state0.op.with_coeff(coeff)
        dg = _rhs_coeff(op)
        if not with_h:
            return dg, None
        length = min(op.nmax + 1, len(norms))
        return dg, -(op.shifted(0, 0, length) @ norms[:length])

    traj = [state0]
    g, h = state0.op.coeff.copy(), (state0.norms.copy() if with_h else None)
    t = state0.t
    for s in range(steps):
        g1, h1 = f(g, h)
        g2, h2 = f(g + 0.5 * dt * g1, h + 0.5 * dt * h1 if with_h else None)
        g3, h3 = f(g + 0.5 * dt * g2, h + 0.5 * dt * h2 if with_h else None)
        g4, h4 = f(g + dt * g3, h + dt * h3 if with_h else None)
        g = g + dt / 6.0 * (g1 + 2 * g2 + 2 * g3 + g4)
        if with_h:
            h = h + dt / 6.0 * (h1 + 2 * h2 + 2 * h3 + h4)
        t = state0.t + (s + 1) * dt
        st = LatticeState(t, state0.op.with_coeff(g, t), h)
        if check and with_h:
            hdot_rhs(st, check=True)
        traj.append(st)
    return traj


# ---------------------------------------------------------------- validators


@dataclass
class FdReport:
    """Finite-difference residuals against an analytic right-hand side."""

    name: str
    h: float
    max_residual: float
    threshold: float
    per_band: dict = field(default_factory=dict)
    residual_half: Optional[float] = None
    ratio: Optional[float] = None
    noise_floor: float = 0.0
    order_enforced: bool = True

    @property
    def order_ok(self) -> Optional[bool]:
        """``None`` when no ratio was computed or it is not enforced."""
        if self.ratio is None or not self.order_enforced:
            return None
        return ORDER_BAND[0] <= self.ratio <= ORDER_BAND[1]

    @property
    def passed(self) -> bool:
        ok = self.max_residual <= self.threshold
        return ok and (self.order_ok is not False)

    def to_dict(self) -> dict:
        return {"name": self.name, "h": self.h, "max_residual": self.max_residual,
                "threshold": self.threshold, "per_band": {str(k): v for k, v in self.per_band.items()},
                "residual_half": self.residual_half, "ratio": self.ratio, "noise_floor": self.noise_floor,
                "order_enforced": self.order_enforced, "passed": self.passed}


def _band_residuals(fd: np.ndarray, rhs: np.ndarray, k: int) -> dict:
    out = {}
    for m in range(-k, k + 1):
        d = np.abs(fd[m + k] - rhs[m + k])
        out[m] = float(np.nanmax(d)) if not np.isnan(d).all() else 0.0
    return out


def families_at(w: WeightSpec, times: Sequence[float], nmax: int, rule: QuadratureRule) -> list:
    return [build_family(w, t, nmax, rule) for t in times]


def _fd_g(w, lam, t, h, nmax, rule):
    fm, f0, fp = families_at(w, (t - h, t, t + h), nmax, rule)
    gm, g0, gp = (compute_g(f, lam, rule) for f in (fm, f0, fp))
    fd = (gp.coeff - gm.coeff) / (2 * h)
    return fd, g0, (fm, f0, fp)


def _deformed(w: WeightSpec, lam: MatrixPolynomial) -> WeightSpec:
    if w.flow is None and w.deformation is lam:
        return w
    return w.with_deformation(lam)


def fd_validate(w: WeightSpec, lam: MatrixPolynomial, t: float = 0.0, h: float = 1e-4, nmax: int = 12,
                rule: Optional[QuadratureRule] = None, order_check=True,
                threshold: float = FD_TOL) -> FdReport:
    """Rebuild bands at ``t - h, t, t + h`` and compare the central difference with :func:`toda_rhs`.

    With ``order_check`` the comparison is repeated at ``h/2`` and the ratio of
    residuals must lie in ``[3.2, 4.8]`` (second-order convergence).  With
    ``order_check="auto"`` the ratio is enforced only when the residual at
    ``h`` exceeds the round-off floor ``1e-12 max|G| / h``; below it the
    residual is noise and carries no order information.
    """
    w = _deformed(w, lam)
    rule = rule or default_rule(w, nmax, lam.degree)
    k = lam.degree

    def run(step):
        fd, g0, _ = _fd_g(w, lam, t, step, nmax, rule)
        return _band_residuals(fd, _rhs_coeff(g0), k), g0

    bands, g0 = run(h)
    rep = FdReport("toda", h, max(bands.values()), threshold, bands)
    rep.noise_floor = NOISE_FACTOR * float(np.nanmax(np.abs(g0.coeff))) / h
    if order_check:
        half, _ = run(h / 2)
        rep.residual_half = max(half.values())
        rep.ratio = rep.max_residual / rep.residual_half if rep.residual_half > 0 else float("inf")
        rep.order_enforced = order_check != "auto" or rep.max_residual > rep.noise_floor
    return rep


def hdot_validate(w: WeightSpec, lam: MatrixPolynomial, t: float = 0.0, h: float = 1e-4, nmax: int = 12,
                  rule: Optional[QuadratureRule] = None, threshold: float = HDOT_FD_TOL) -> FdReport:
    """Central difference of ``H_n`` against ``-G_0(n) H_n``, relative to ``|H_n|``."""
    w = _deformed(w, lam)
    rule = rule or default_rule(w, nmax, lam.degree)
    fm, f0, fp = families_at(w, (t - h, t, t + h), nmax, rule)
    op = compute_g(f0, lam, rule)
    rhs = hdot_rhs(LatticeState(t, op, f0.norms), check=False)
    worst = 0.0
    for n in range(len(rhs)):
        if np.isnan(rhs[n]).any():
            continue
        fd = (fp.norms[n] - fm.norms[n]) / (2 * h)
        worst = max(worst, max_norm(fd - rhs[n]) / max_norm(f0.norms[n]))
    rep = FdReport("hdot", h, worst, threshold)
    rep.per_band = {"two_sided": hdot_two_sided_residual(op, f0.norms)}
    return rep


def flow_weight(w: WeightSpec, lam: MatrixPolynomial, v: Callable[[float], Sequence[float]]) -> WeightSpec:
    """Weight deformed by ``exp(-v(Lambda(x); t))``."""
    return w.with_flow(lam, v)


def kdot_validate(w: WeightSpec, lam: MatrixPolynomial, v: Callable[[float], Sequence[float]],
                  vdot: Callable[[float], Sequence[float]], t: float = 0.0, h: float = 1e-4,
                  nmax: int = 12, rule: Optional[QuadratureRule] = None,
                  threshold: float = FD_TOL) -> FdReport:
    """Central difference of ``K_0, K_{-1}`` under ``exp(-v(Lambda;t))`` against :func:`kdot_rhs`."""
    if lam.degree != 1:
        raise ContractError("the K-flow equations need a degree-1 symbol")
    wf = flow_weight(w, lam, v)
    rule = rule or default_rule(wf, nmax, wf.exponent_degree)
    fm, f0, fp = families_at(wf, (t - h, t, t + h), nmax, rule)
    km, k0, kp = (compute_g(f, lam, rule) for f in (fm, f0, fp))
    d0, dm1 = kdot_rhs(k0, vdot(t))
    fd0 = (kp.band(0) - km.band(0)) / (2 * h)
    fdm1 = (kp.band(-1) - km.band(-1)) / (2 * h)
    r0 = np.abs(fd0 - d0)
    rm1 = np.abs(fdm1 - dm1)
    bands = {0: float(np.nanmax(r0)), -1: float(np.nanmax(rm1))}
    return FdReport("kdot", h, max(bands.values()), threshold, bands)


def pdot_check(fam_m: MvopFamily, fam: MvopFamily, fam_p: MvopFamily, m_lambda: BandedDifferenceOperator,
               vdot_coeffs: Sequence[float], h: float, threshold: float = FD_TOL) -> FdReport:
    """Central difference of ``P_n`` against ``sum_{m<n} V_{m-n}(n) P_m`` with ``V = dv/dt(M_Lambda)``.

    The residual for each ``n`` is the largest coefficient gap divided by
    ``max(1, max |coeff of P_n|)``; monic coefficients grow quickly with ``n``
    and so does the finite-difference truncation error.
    """
    vm = compose_vm(m_lambda, vdot_coeffs)
    d = len(vdot_coeffs) - 1
    worst = 0.0
    for n in range(0, fam.nmax - d + 1):
        fd = (fam_p.polys[n] - fam_m.polys[n]) * (1.0 / (2 * h))
        rhs = MatrixPolynomial.constant(np.zeros((fam.size, fam.size)))
        for m in range(n):
            c = vm.get(m - n, n)
            if np.isnan(c).any():
                raise WindowError(f"band {m - n} unavailable at n={n}")
            rhs = rhs + c @ fam.polys[m]
        scale = max(1.0, float(np.max(np.abs(fam.polys[n].coeffs))))
        worst = max(worst, fd.max_coeff_diff(rhs) / scale)
    return FdReport("pdot", h, worst, threshold)


def pdot_validate(w: WeightSpec, lam: MatrixPolynomial, v, vdot, t: float = 0.0, h: float = 1e-4,
                  nmax: int = 12, rule: Optional[QuadratureRule] = None) -> FdReport:
    wf = flow_weight(w, lam, v)
    rule = rule or default_rule(wf, nmax, wf.exponent_degree)
    fm, f0, fp = families_at(wf, (t - h, t, t + h), nmax, rule)
    return pdot_check(fm, f0, fp, compute_g(f0, lam, rule), vdot(t), h)
