from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvtoda.errors import DimensionError, DomainError, ParameterError
from mvtoda.hermite import HermiteParams, casimir, hermite_weight
from mvtoda.polynomial import MatrixPolynomial
from mvtoda.presets import scalar_weight
from mvtoda.weight import (
    WeightSpec,
    check_zero_order_symmetry,
    compose_v_of_lambda,
    eval_weight,
    scalar_times_identity,
)

H2 = HermiteParams((1.0,))


def test_t_zero_gives_base_weight():
    w = hermite_weight(H2)
    xs = np.linspace(-2, 2, 5)
    assert np.allclose(eval_weight(w, xs, 0.0), w.base_at(xs))


@given(st.floats(-2, 2))
def test_hermite_weight_at_origin(t):
    w = hermite_weight(H2)
    assert np.allclose(eval_weight(w, 0.0, t), np.diag([math.exp(-t), math.exp(-2 * t)]))


def test_scalar_weight_values():
    w = scalar_weight("x")
    assert eval_weight(w, 2.0, 1.0)[0, 0] == pytest.approx(math.exp(-2))
    assert eval_weight(w, 2.0, 1.0, full=True)[0, 0] == pytest.approx(math.exp(-6))


@given(st.floats(-3, 3), st.floats(-1, 1))
def test_weight_hermitian_pd(x, t):
    m = eval_weight(hermite_weight(HermiteParams((1.0, 0.7))), x, t)
    assert np.allclose(m, m.conj().T)
    assert np.linalg.eigvalsh(m).min() > 0


def test_symmetry_checks():
    w = hermite_weight(H2)
    xs = np.linspace(-2, 2, 5)
    assert check_zero_order_symmetry(scalar_times_identity(2, [0.0, 1.0]), w, sample_xs=xs).passed
    assert check_zero_order_symmetry(casimir(H2), w, sample_xs=xs).passed
    assert check_zero_order_symmetry(casimir(H2), w, t=0.7, sample_xs=xs).passed
    bad = check_zero_order_symmetry(MatrixPolynomial.constant(H2.J), w, sample_xs=xs)
    assert not bad.passed and bad.max_residual > 0.1


def test_symmetry_size_mismatch():
    with pytest.raises(DimensionError):
        check_zero_order_symmetry(MatrixPolynomial.identity(3), hermite_weight(H2))


def test_compose_v_of_lambda_examples():
    lam = casimir(H2)
    assert compose_v_of_lambda(lam, [0.0, 1.0]).max_coeff_diff(lam) == 0.0
    sq = compose_v_of_lambda(lam, [0.0, 0.0, 1.0])
    ref = MatrixPolynomial(np.array([H2.J @ H2.J, -(H2.J @ H2.A + H2.A @ H2.J)]))
    assert sq.max_coeff_diff(ref) < 1e-15
    x = scalar_times_identity(1, [0.0, 1.0])
    assert compose_v_of_lambda(x, [0.0, 0.0, 1.0]).max_coeff_diff(MatrixPolynomial.x(1, 2)) == 0.0


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4), st.floats(-2, 2))
def test_compose_v_of_lambda_pointwise(v, x):
    lam = casimir(H2)
    lx = lam(x)
    ref = sum(c * np.linalg.matrix_power(lx, j) for j, c in enumerate(v))
    assert np.allclose(compose_v_of_lambda(lam, v)(x), ref, atol=1e-10)


def test_weight_spec_validation():
    base = lambda xs: np.ones((len(xs), 1, 1))  # noqa: E731
    with pytest.raises(DimensionError):
        WeightSpec(1, base, MatrixPolynomial.identity(2))
    with pytest.raises(ParameterError):
        WeightSpec(1, base, MatrixPolynomial.identity(1), support=(0.0, 1.0), gaussian=True)
    w = WeightSpec(1, base, MatrixPolynomial.identity(1), support=(0.0, 1.0), gaussian=False)
    with pytest.raises(DomainError):
        eval_weight(w, 2.0, 0.0)
    with pytest.raises(ParameterError):
        compose_v_of_lambda(MatrixPolynomial.identity(1), [])
