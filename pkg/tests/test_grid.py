import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vaceuler.errors import DimensionError, FieldError
from vaceuler.grid import (
    Slab,
    endcorrected_trapezoid_weights,
    fd_weights,
    sbp_operator,
    vertical_diff_matrix,
)


def test_fd_weights_central_second_order():
    c = fd_weights(0.0, np.array([-1.0, 0.0, 1.0]), 2)
    np.testing.assert_allclose(c[:, 1], [-0.5, 0.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(c[:, 2], [1.0, -2.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("degree", range(7))
def test_vertical_derivative_exact_on_polynomials(degree):
    x = np.linspace(0, 1, 20)
    D = vertical_diff_matrix(20, 6)
    expected = degree * x ** max(degree - 1, 0) if degree else np.zeros_like(x)
    np.testing.assert_allclose(D @ x**degree, expected, atol=1e-9)


def test_vertical_derivative_sixth_order():
    errs = []
    for n in (32, 64):
        x = np.linspace(0, 1, n)
        errs.append(np.abs(vertical_diff_matrix(n) @ np.sin(3 * x) - 3 * np.cos(3 * x)).max())
    order = np.log(errs[0] / errs[1]) / np.log(63 / 31)
    assert 5.5 < order < 7.5


def test_trapezoid_correction_exact_to_degree_7():
    w = endcorrected_trapezoid_weights(17, m=4)
    x = np.linspace(0, 1, 17)
    for q in range(8):
        assert abs(w @ x**q - 1 / (q + 1)) < 1e-13
    assert np.all(w > 0)


@pytest.mark.parametrize("n", [20, 40, 81])
def test_sbp_property_and_positive_norm(n):
    D, w = sbp_operator(n)
    B = np.zeros((n, n))
    B[0, 0], B[-1, -1] = -1.0, 1.0
    HD = np.diag(w) @ D
    np.testing.assert_allclose(HD + HD.T, B, atol=1e-13)
    assert np.all(w > 0)
    x = np.linspace(0, 1, n)
    for q in range(4):
        expected = q * x ** max(q - 1, 0) if q else 0 * x
        np.testing.assert_allclose(D @ x**q, expected, atol=1e-9)


def test_sbp_slab_uses_operator_norm_as_quadrature():
    s = Slab(1, 1, 40, vertical_scheme="sbp")
    assert abs(s.integrate(np.ones(40)) - 1.0) < 1e-14
    with pytest.raises(ValueError):
        Slab(1, 1, 40, vertical_scheme="spline")


def test_spectral_derivative_exact():
    s = Slab(2, 16, 12)
    x = s.coords
    f = np.sin(2 * np.pi * 3 * x[0]) * x[1]
    np.testing.assert_allclose(s.d_bar(f, 1), 6 * np.pi * np.cos(6 * np.pi * x[0]) * x[1], atol=1e-11)


def test_grad_layout_matches_components():
    s = Slab(3, 8, 10)
    x = s.coords
    v = np.stack([x[2] ** 2, np.sin(2 * np.pi * x[0]), x[1] * 0])
    G = s.grad(v)
    assert G.shape == (3, 3) + s.shape
    np.testing.assert_allclose(G[0, 2], 2 * x[2], atol=1e-10)
    np.testing.assert_allclose(G[1, 0], 2 * np.pi * np.cos(2 * np.pi * x[0]), atol=1e-10)


def test_integrate_unit_volume_and_polynomial():
    s = Slab(3, 8, 16)
    assert abs(s.integrate(np.ones(s.shape)) - 1) < 1e-14
    assert abs(s.integrate(s.coords[2] ** 5) - 1 / 6) < 1e-13


def test_field_validation():
    s = Slab(2, 8, 10)
    with pytest.raises(FieldError):
        s.check(np.zeros((8, 11)))
    bad = np.zeros(s.shape)
    bad[0, 0] = np.nan
    with pytest.raises(FieldError):
        s.check(bad)
    with pytest.raises(DimensionError):
        Slab(1, 1, 10).d_bar(np.zeros(10))
    with pytest.raises(DimensionError):
        Slab(4, 8, 10)


def test_filter_keeps_low_modes():
    s = Slab(2, 16, 10)
    x = s.coords
    low = np.cos(2 * np.pi * x[0])
    high = np.cos(2 * np.pi * 7 * x[0])
    np.testing.assert_allclose(s.filter_horizontal(low + high), low, atol=1e-13)


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 3))
def test_derivative_linear(a, b, k):
    s = Slab(2, 8, 12)
    x = s.coords
    f = np.cos(2 * np.pi * k * x[0]) * np.exp(x[1])
    g = x[1] ** 3
    for direction in range(2):
        lhs = s.d(a * f + b * g, direction)
        rhs = a * s.d(f, direction) + b * s.d(g, direction)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + abs(a) + abs(b)))
