from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvtoda import diffop
from mvtoda.hermite import (
    HermiteParams,
    casimir,
    check_identity_exp,
    closed_form_g2x2,
    closed_form_norm2x2,
    closed_form_operator2x2,
    closed_form_p2x2,
    closed_form_p2x2_poly,
    closed_form_recurrence2x2,
    deformed_weight_closed,
    g_from_recurrence,
    hermite_weight,
    rescaled_factorization_check,
)
from mvtoda.linalg import max_norm
from mvtoda.mvop import build_family, default_rule
from mvtoda.polynomial import MatrixPolynomial
from mvtoda.toda import toda_rhs
from mvtoda.weight import eval_weight

H2 = HermiteParams((1.0,))


def family(t, nmax=11, p=H2):
    w = hermite_weight(p)
    return build_family(w, t, nmax, default_rule(w, nmax, 1))


def test_params_and_casimir():
    assert np.array_equal(H2.J, np.diag([1.0, 2.0]))
    assert np.array_equal(-H2.A, [[0.0, 0.0], [-1.0, 0.0]])
    one = casimir(HermiteParams(()))
    assert one.degree == 0 and one.coeffs[0, 0, 0] == 1.0


def test_base_weight_values():
    w = hermite_weight(H2)
    assert np.allclose(w.base_at(1.0)[0], [[1.0, 1.0], [1.0, 2.0]])
    assert np.allclose(hermite_weight(HermiteParams(())).base_at(0.3)[0], [[1.0]])


def test_deformed_weight_closed():
    t = math.log(2.0)
    ref = math.exp(-1) * np.array([[1.0, 0.0], [1.0, 1.0]]) @ np.diag([0.5, 0.25]) @ np.array([[1.0, 1.0], [0.0, 1.0]])
    assert np.allclose(deformed_weight_closed(H2, 1.0, t, full=True), ref)
    xs = np.linspace(-2, 2, 9)
    for t in (-0.5, 0.0, 0.5):
        assert max_norm(deformed_weight_closed(H2, xs, t) - eval_weight(hermite_weight(H2), xs, t)) < 1e-12


def test_casimir_exponential_identity():
    xs = np.linspace(-3, 3, 13)
    ts = np.linspace(-1, 1, 9)
    assert check_identity_exp(H2, xs, ts) < 1e-11
    assert check_identity_exp(HermiteParams((1.0, 0.5)), xs, ts) < 1e-11


@pytest.mark.parametrize("t", [0.0, 0.5])
def test_conjugation(t):
    rep = rescaled_factorization_check(H2, t)
    assert rep.passed
    if t == 0.0:
        assert rep.poly_residual == 0.0


def test_p2x2_examples():
    assert closed_form_p2x2_poly(0, 0.3).max_coeff_diff(MatrixPolynomial.identity(2)) == 0.0
    p1 = MatrixPolynomial(np.array([[[0.0, -1 / 3], [-0.5, 0.0]], np.eye(2)]))
    assert closed_form_p2x2_poly(1, 0.0).max_coeff_diff(p1) < 1e-15
    # n = 2 uses the denominator n a^2 + 2 = 4
    p2 = MatrixPolynomial(np.array([[[-0.25, 0.0], [0.0, -0.5]], [[0.0, -0.5], [-1.0, 0.0]], np.eye(2)]))
    assert closed_form_p2x2_poly(2, 0.0).max_coeff_diff(p2) < 1e-15
    assert family(0.0, 4).polys[2].max_coeff_diff(p2) < 1e-13
    x = 0.7
    assert np.allclose(closed_form_p2x2(2, x, 0.0), p2(x))


@given(st.integers(0, 8), st.floats(-1, 1), st.floats(0.3, 2.0))
def test_printed_is_consistent_with_negated_time(n, t, a):
    printed = closed_form_p2x2_poly(n, t, a, printed=True)
    assert printed.max_coeff_diff(closed_form_p2x2_poly(n, -t, a)) < 1e-12
    for g1, g2 in zip(closed_form_g2x2(n, t, a, printed=True), closed_form_g2x2(n, -t, a)):
        assert max_norm(g1 - g2) < 1e-12


@pytest.mark.parametrize("t", [-0.5, 0.0, 0.5])
def test_closed_forms_match_numerics(t):
    fam = family(t)
    for n in range(11):
        assert fam.polys[n].max_coeff_diff(closed_form_p2x2_poly(n, t)) < 1e-8
        b, c = closed_form_recurrence2x2(n, t)
        assert max_norm(fam.recur_B[n] - b) < 1e-8
        assert max_norm(fam.recur_C[n] - c) < 1e-8
        hn = closed_form_norm2x2(n, t)
        assert max_norm(fam.norms[n] - hn) < 1e-8 * max_norm(hn)


def test_closed_form_orthogonality_under_closed_weight():
    t = 0.3
    xs, ws = np.polynomial.hermite.hermgauss(60)
    wv = deformed_weight_closed(H2, xs, t)
    vals = [closed_form_p2x2_poly(n, t)(xs) for n in range(11)]
    for n in range(11):
        hn = np.einsum("k,kab,kbc,kdc->ad", ws, vals[n], wv, vals[n].conj())
        for m in range(n):
            g = np.einsum("k,kab,kbc,kdc->ad", ws, vals[n], wv, vals[m].conj())
            assert max_norm(g) <= 1e-9 * max_norm(hn)


def test_g_examples():
    g1, g0, gm1 = closed_form_g2x2(1, 0.0)
    assert np.allclose(g1, -H2.A)
    assert np.allclose(g0, np.diag([4 / 3, 1.5]))
    assert np.allclose(gm1, [[0.0, -2 / 9], [0.0, 0.0]])
    assert np.all(closed_form_g2x2(0, 0.4)[2] == 0)
    assert np.allclose(closed_form_g2x2(0, 0.0)[1], np.diag([1.0, 5 / 3]))


@pytest.mark.parametrize("t", [-0.5, 0.5])
def test_g_closed_form_vs_numerics_and_recurrence(t):
    fam = family(t)
    lam = casimir(H2)
    op = diffop.compute_g(fam, lam)
    for n in range(11):
        g = closed_form_g2x2(n, t)
        gr = g_from_recurrence(fam.recur_B, fam.recur_C, H2.A, H2.J, n)
        for j in (1, 0, -1):
            assert max_norm(op.get(j, n) - g[1 - j]) < 1e-8
            assert max_norm(gr[1 - j] - g[1 - j]) < 1e-8


def test_g_closed_form_weak_pearson():
    fam = family(0.2)
    op = closed_form_operator2x2(11, 0.2)
    assert diffop.weak_pearson_residual(op, fam.norms) < 1e-8


def test_casimir_action_on_closed_forms():
    t = -0.3
    lam = casimir(H2)
    for n in range(1, 10):
        g1, g0, gm1 = closed_form_g2x2(n, t)
        lhs = g1 @ closed_form_p2x2_poly(n + 1, t) + g0 @ closed_form_p2x2_poly(n, t) \
            + gm1 @ closed_form_p2x2_poly(n - 1, t)
        assert lhs.max_coeff_diff(closed_form_p2x2_poly(n, t) @ lam) < 1e-9


def test_closed_form_g_solves_toda():
    # Richardson-extrapolated central difference of the closed forms
    t, h, nmax = 0.25, 1e-5, 12

    def d(step):
        return (closed_form_operator2x2(nmax, t + step).coeff - closed_form_operator2x2(nmax, t - step).coeff) / (2 * step)

    d1, d2 = d(h), d(h / 2)
    fd = (4 * d2 - d1) / 3
    rhs = toda_rhs(closed_form_operator2x2(nmax, t)).coeff
    assert np.nanmax(np.abs(fd - rhs)) < 1e-9
    assert np.nanmax(np.abs(d1 - rhs)) < 1e-8


def test_scalar_degenerate_casimir():
    p = HermiteParams(())
    w = hermite_weight(p)
    fam = build_family(w, 0.0, 6)
    op = diffop.compute_g(fam, casimir(p))
    assert op.k == 0
    assert np.allclose(op.band(0), 1.0)
