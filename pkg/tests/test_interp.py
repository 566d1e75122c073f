import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssspline.errors import DomainError, NumericalError, ValidationError
from ssspline.interp import (CubeDomain, Interpolant, ScatteredData,
                             build_interpolant, eval_interpolant, fill_distance,
                             fill_distance_error_bound, monomial_exponents,
                             poly_basis, poly_dim)
from ssspline.theory import KernelParams


def _random_data(rng, n_pts, f=None, n=2, scale=1.0):
    X = scale * rng.random((n_pts, n))
    y = rng.normal(size=n_pts) if f is None else f(X)
    return ScatteredData(X, y)


def test_poly_basis_order():
    np.testing.assert_array_equal(poly_basis(2, 2, [1.0, 2.0]), [1, 1, 2, 1, 2, 4])
    assert monomial_exponents(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert poly_dim(4, 2) == 15 == len(monomial_exponents(4, 2))


def test_poly_basis_rejects_wrong_dimension():
    with pytest.raises(DomainError):
        poly_basis(2, 1, [1.0, 2.0, 3.0])


@pytest.mark.parametrize("lam", [2, 4])
def test_interpolates_data(lam):
    rng = np.random.default_rng(0)
    data = _random_data(rng, 40)
    s = build_interpolant(data, KernelParams(2, lam, 0.2))
    np.testing.assert_allclose(s(data.points), data.values, atol=1e-9)
    # side conditions: kernel coefficients annihilate P_{m-1}
    P = poly_basis(2, lam // 2, data.points)
    assert np.max(np.abs(P.T @ s.kernel_coeffs)) < 1e-9


def test_linear_data_is_reproduced_exactly():
    rng = np.random.default_rng(1)
    data = _random_data(rng, 25, lambda X: 2 + X[:, 0] - 3 * X[:, 1])
    s = build_interpolant(data, KernelParams(2, 2, 0.3))
    assert np.max(np.abs(s.kernel_coeffs)) < 1e-10
    np.testing.assert_allclose(s.poly_coeffs, [2, 1, -3], atol=1e-10)


def test_zero_data_gives_zero_interpolant():
    rng = np.random.default_rng(2)
    X = rng.random((15, 2))
    s = build_interpolant(ScatteredData(X, np.zeros(15)), KernelParams(2, 2, 0.5))
    assert np.all(s.kernel_coeffs == 0) and np.all(s.poly_coeffs == 0)


def test_collinear_points_fail_polynomial_stage():
    X = np.array([[0, 0], [1, 1], [2, 2], [3, 3.0]])
    with pytest.raises(NumericalError) as err:
        build_interpolant(ScatteredData(X, np.arange(4.0)), KernelParams(2, 2, 1.0))
    assert err.value.stage == "polynomial"


def test_input_validation():
    with pytest.raises(ValidationError):
        build_interpolant(ScatteredData([[0, 0], [1, 0]], [0, 1]), KernelParams(2, 2, 1.0))
    dup = ScatteredData([[0, 0], [1, 0], [0, 1], [0, 1]], [0, 1, 2, 2])
    with pytest.raises(ValidationError):
        build_interpolant(dup, KernelParams(2, 2, 1.0))
    with pytest.raises(ValidationError):
        ScatteredData([[0, 0], [1, 0]], [0.0])
    with pytest.raises(ValidationError):
        build_interpolant(ScatteredData(np.eye(3), [0, 1, 2]), KernelParams(2, 2, 1.0))


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    data = _random_data(rng, 20)
    perm = rng.permutation(20)
    params = KernelParams(2, 2, 0.6)
    s1 = build_interpolant(data, params)
    s2 = build_interpolant(ScatteredData(data.points[perm], data.values[perm]), params)
    probes = rng.random((30, 2))
    np.testing.assert_allclose(s1(probes), s2(probes), atol=1e-8)


def test_flat_kernel_reports_residual_stage():
    rng = np.random.default_rng(0)
    data = _random_data(rng, 40)
    with pytest.raises(NumericalError) as err:
        build_interpolant(data, KernelParams(2, 2, 5.0))
    assert err.value.stage in ("residual", "kernel")


def test_four_dimensional_interpolation():
    rng = np.random.default_rng(5)
    data = _random_data(rng, 60, n=4)
    s = build_interpolant(data, KernelParams(4, 2, 1.0))
    np.testing.assert_allclose(s(data.points), data.values, atol=1e-8)


def test_json_roundtrip():
    rng = np.random.default_rng(6)
    data = _random_data(rng, 12)
    s = build_interpolant(data, KernelParams(2, 2, 0.5))
    doc = json.loads(json.dumps(s.to_json()))
    assert doc["basis_order"] == "graded-lex"
    s2 = Interpolant.from_json(doc)
    x = rng.random((5, 2))
    np.testing.assert_allclose(eval_interpolant(s, x), eval_interpolant(s2, x), rtol=1e-10, atol=1e-12)


def test_fill_distance_examples():
    unit = CubeDomain([0.0, 0.0], 1.0)
    assert fill_distance(unit, [[0.5, 0.5]]) == pytest.approx(np.sqrt(0.5))
    corners = [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert fill_distance(unit, corners) == pytest.approx(0.5 * np.sqrt(2) / 1, abs=1e-12)
    assert fill_distance_error_bound(unit, 101) == pytest.approx(np.sqrt(2) / 200)


def test_fill_distance_is_lower_bound_within_tolerance():
    rng = np.random.default_rng(7)
    dom = CubeDomain([0.0, 0.0], 1.0)
    X = rng.random((30, 2))
    coarse = fill_distance(dom, X, 21)
    fine = fill_distance(dom, X, 801)
    assert coarse <= fine + 1e-12
    assert fine - coarse <= fill_distance_error_bound(dom, 21)


def test_fill_distance_errors():
    with pytest.raises(DomainError):
        fill_distance(CubeDomain([0.0, 0.0], 1.0), np.empty((0, 2)))
    with pytest.raises(DomainError):
        fill_distance(CubeDomain([0.0, 0.0], 1.0), [[0.5, 0.5]], resolution=1)
