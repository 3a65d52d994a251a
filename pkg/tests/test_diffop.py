from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvtoda import diffop
from mvtoda.diffop import BandedDifferenceOperator, compute_g
from mvtoda.errors import ConsistencyError, ContractError, ParameterError
from mvtoda.hermite import HermiteParams, casimir, hermite_weight
from mvtoda.mvop import build_family, default_rule
from mvtoda.polynomial import MatrixPolynomial
from mvtoda.presets import scalar_weight
from mvtoda.weight import compose_v_of_lambda, scalar_times_identity

H2 = HermiteParams((1.0,))


def family(p=H2, t=0.0, nmax=10, lam=None):
    w = hermite_weight(p, lam)
    return build_family(w, t, nmax, default_rule(w, nmax, w.exponent_degree))


def test_x_symbol_gives_recurrence():
    fam = family()
    op = compute_g(fam, scalar_times_identity(2, [0.0, 1.0]))
    for n in range(fam.nmax):
        assert np.allclose(op.get(1, n), np.eye(2))
        assert np.allclose(op.get(0, n), fam.recur_B[n], atol=1e-12)
        assert np.allclose(op.get(-1, n), fam.recur_C[n], atol=1e-12)


@pytest.mark.parametrize("t", [-0.5, 0.0, 0.7])
def test_casimir_bands(t):
    lam = casimir(H2)
    op = compute_g(family(t=t, lam=lam), lam)
    assert np.allclose(op.band(1)[: op.window() + 1], -H2.A, atol=1e-10)
    if t == 0.0:
        assert np.allclose(op.get(0, 1), np.diag([4 / 3, 1.5]), atol=1e-12)
        assert np.allclose(op.get(-1, 1), [[0.0, -2 / 9], [0.0, 0.0]], atol=1e-12)
        assert np.allclose(op.get(0, 0), np.diag([1.0, 5 / 3]), atol=1e-12)


def test_structure_and_availability():
    lam = casimir(H2)
    fam = family(nmax=6, lam=lam)
    op = compute_g(fam, lam)
    assert np.all(op.get(-1, 0) == 0)
    assert not op.available(1, 6)
    assert op.available(-1, 6)
    assert op.window() == 5


@pytest.mark.parametrize("lam", [scalar_times_identity(2, [0.0, 1.0]), casimir(H2),
                                 scalar_times_identity(2, [0.0, 0.0, 1.0])])
def test_weak_pearson_and_leading_band(lam):
    fam = family(t=0.4, lam=lam)
    op = compute_g(fam, lam)
    assert diffop.weak_pearson_residual(op, fam.norms) < 1e-9
    assert diffop.leading_band_residual(op, lam) < 1e-10


def test_apply_matches_right_multiplication():
    lam = casimir(H2)
    fam = family(lam=lam)
    op = compute_g(fam, lam)
    for n in range(fam.nmax):
        assert diffop.apply(op, fam, n).max_coeff_diff(fam.polys[n] @ lam) < 1e-9
    assert diffop.apply(op, fam, 0).max_coeff_diff(lam) < 1e-12
    with pytest.raises(ParameterError):
        diffop.apply(op, fam, fam.nmax)


def test_apply_scalar_hermite():
    w = scalar_weight("x")
    fam = build_family(w, 0.0, 6)
    op = compute_g(fam, w.deformation)
    ref = fam.polys[4] + 1.5 * fam.polys[2]
    assert diffop.apply(op, fam, 3).max_coeff_diff(ref) < 1e-12


@pytest.mark.parametrize("v", [[0.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0, 1.0], [1.0, -2.0, 0.5]])
def test_compose_matches_direct(v):
    lam = casimir(H2)
    fam = family(nmax=12, lam=lam)
    op = compute_g(fam, lam)
    ref = compute_g(fam, compose_v_of_lambda(lam, v))
    got = diffop.compose_vm(op, v)
    d = np.abs(diffop.add(got, ref, -1.0).coeff)
    assert np.nanmax(d) / max(1.0, np.nanmax(np.abs(ref.coeff))) < 1e-9


def test_compose_identity_is_neutral():
    lam = casimir(H2)
    op = compute_g(family(lam=lam), lam)
    same = diffop.compose_vm(op, [0.0, 1.0])
    assert np.array_equal(np.isnan(same.coeff), np.isnan(op.coeff))
    assert np.nanmax(np.abs(same.coeff - op.coeff)) == 0.0


def test_compose_vm_needs_bandwidth_one():
    lam = scalar_times_identity(1, [0.0, 0.0, 1.0])
    w = scalar_weight("x2")
    op = compute_g(build_family(w, 0.0, 6), lam)
    with pytest.raises(ContractError):
        diffop.compose_vm(op, [0.0, 1.0])


def test_corrupted_band_trips_consistency_check():
    lam = casimir(H2)
    fam = family(lam=lam)
    op = compute_g(fam, lam)
    bad = op.coeff.copy()
    bad[2, 3] += 1e-3
    assert diffop.weak_pearson_residual(op.with_coeff(bad), fam.norms) > 1e-6


def test_mismatched_symbol_raises():
    fam = family()
    with pytest.raises(ConsistencyError):
        compute_g(fam, MatrixPolynomial(np.array([H2.J, -H2.A.T])))


@given(st.integers(-3, 3), st.integers(0, 8))
def test_shifted_matches_get(j, shift):
    lam = casimir(H2)
    op = compute_g(family(nmax=8, lam=lam), lam)
    if abs(j) > op.k:
        return
    s = op.shifted(j, shift, op.nmax + 1)
    for n in range(op.nmax + 1):
        m = n + shift
        if m <= op.nmax:
            assert np.array_equal(s[n], op.get(j, m), equal_nan=True)
        else:
            assert np.isnan(s[n]).all()


def test_from_bands_and_dict_roundtrip():
    from mvtoda.export import operator_from_dict
    op = BandedDifferenceOperator.from_bands({1: np.ones((4, 1, 1)), 0: np.zeros((4, 1, 1)),
                                              -1: np.arange(4.0)[:, None, None] / 2})
    back = operator_from_dict(op.to_dict())
    assert np.array_equal(back.coeff, op.coeff, equal_nan=True)
