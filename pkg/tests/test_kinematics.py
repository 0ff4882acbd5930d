import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vaceuler.errors import DimensionError, SingularJacobian
from vaceuler.grid import Slab
from vaceuler.kinematics import (
    build_bundle,
    check_horizontal_identities,
    check_time_identities,
    cofactor_levels,
    det_and_adjugate,
    eulerian_curl,
    jacobian_time_derivatives,
    lagrangian_curl,
    lagrangian_div,
    leibniz_inverse_power,
    piola_residual,
)

TP = 2 * np.pi


@pytest.fixture
def slab3():
    return Slab(3, 16, 24)


def test_identity_bundle(slab3):
    b = build_bundle(slab3, slab3.coords)
    np.testing.assert_allclose(b.J, 1.0, atol=1e-12)
    eye = np.eye(3).reshape(3, 3, 1, 1, 1)
    np.testing.assert_allclose(b.A, np.broadcast_to(eye, b.A.shape), atol=1e-12)
    np.testing.assert_allclose(b.a, np.broadcast_to(eye, b.a.shape), atol=1e-12)
    np.testing.assert_allclose(b.n, np.broadcast_to(np.array([0, 0, 1.0]).reshape(3, 1, 1), b.n.shape), atol=1e-12)
    assert piola_residual(b) < 1e-10


def test_vertical_stretch_jacobian(slab3):
    x = slab3.coords
    eta = x.copy()
    eta[2] = x[2] + 0.1 * x[2] ** 2
    b = build_bundle(slab3, eta)
    np.testing.assert_allclose(b.J, 1 + 0.2 * x[2], atol=1e-12)


def test_constant_linear_map_cofactor(slab3):
    L = np.diag([2.0, 1.0, 1.0])
    b = build_bundle(slab3, np.einsum("ij,j...->i...", L, slab3.coords), linear_part=L)
    np.testing.assert_allclose(b.J, 2.0, atol=1e-12)
    expected = np.diag([1.0, 2.0, 2.0]).reshape(3, 3, 1, 1, 1)
    np.testing.assert_allclose(b.a, np.broadcast_to(expected, b.a.shape), atol=1e-12)


def test_cofactor_equals_J_times_inverse(slab3):
    x = slab3.coords
    eta = x + 0.05 * np.stack([np.sin(TP * x[1]) * x[2], np.cos(TP * x[0]), x[2] ** 2 * np.sin(TP * x[0])])
    b = build_bundle(slab3, eta)
    np.testing.assert_allclose(b.a, b.J * b.A, atol=1e-14)
    DA = np.einsum("ij...,jk...->ik...", b.Deta, b.A)
    np.testing.assert_allclose(DA, np.broadcast_to(np.eye(3).reshape(3, 3, 1, 1, 1), DA.shape), atol=1e-12)


@given(arrays(np.float64, (3, 3), elements=st.floats(-2, 2)))
def test_adjugate_identity_3d(M):
    J, adj = det_and_adjugate(M)
    np.testing.assert_allclose(M @ adj, J * np.eye(3), atol=1e-11)
    assert abs(J - np.linalg.det(M)) < 1e-11


@given(arrays(np.float64, (2, 2), elements=st.floats(-2, 2)))
def test_adjugate_identity_2d(M):
    J, adj = det_and_adjugate(M)
    np.testing.assert_allclose(M @ adj, J * np.eye(2), atol=1e-12)


def test_singular_jacobian_reports_node():
    s = Slab(2, 8, 12)
    x = s.coords
    eta = x.copy()
    eta[1] = 0.5 - (x[1] - 0.5) ** 2  # folds at x_v = 0.5
    with pytest.raises(SingularJacobian) as err:
        build_bundle(s, eta)
    assert len(err.value.node) == 2


def test_piola_shear_map_and_refinement():
    x_fn = lambda s: s.coords  # noqa: E731
    s = Slab(3, 16, 24)
    x = x_fn(s)
    shear = x.copy()
    shear[0] = x[0] + 0.05 * np.sin(TP * x[1])
    assert piola_residual(build_bundle(s, shear)) < 1e-10

    res = []
    for nv in (32, 64):
        s = Slab(3, 16, nv)
        x = s.coords
        eta = x + 0.05 * np.stack(
            [np.sin(TP * x[1]) * np.exp(x[2]), np.cos(TP * x[0]) * x[2] ** 3, np.sin(np.pi * x[2]) * np.cos(TP * x[1])]
        )
        res.append(piola_residual(build_bundle(s, eta)))
    order = np.log(res[0] / res[1]) / np.log(63 / 31)
    assert 5.5 < order < 6.5


def test_time_identities_static_and_divergence(slab3):
    x = slab3.coords
    zero = np.zeros_like(x)
    r = check_time_identities(slab3, x, zero, x, 1e-3)
    assert max(r.residuals.values()) < 1e-12
    v = zero.copy()
    v[2] = x[2]
    # J(t) = 1 + t is linear, so the forward difference is exact
    assert check_time_identities(slab3, x, v, x + 1e-3 * v, 1e-3).residuals["J2"] < 1e-10
    v = np.stack([np.sin(TP * x[1]) * x[2], np.cos(TP * x[0]), x[2] ** 2])
    rel = [check_time_identities(slab3, x, v, x + d * v, d).residuals["J2"] for d in (1e-3, 5e-4)]
    assert rel[0] / rel[1] == pytest.approx(2.0, rel=1e-2)


def test_horizontal_identities_examples(slab3):
    x = slab3.coords
    assert max(check_horizontal_identities(slab3, x).residuals.values()) < 1e-12
    eta = x.copy()
    eta[2] = x[2] * (1 + 0.1 * np.sin(TP * x[0]))
    r = check_horizontal_identities(slab3, eta).relative()
    assert max(r.values()) < 1e-11


def test_lagrangian_curl_at_identity_matches_eulerian(slab3):
    x = slab3.coords
    v = np.stack([-np.sin(TP * x[1]), np.sin(TP * x[0]), 0 * x[0]])
    b = build_bundle(slab3, x)
    np.testing.assert_allclose(lagrangian_curl(slab3, v, b), eulerian_curl(slab3, v), atol=1e-11)
    phi = np.cos(TP * x[0]) * np.sin(TP * x[1]) * x[2] ** 2
    grad = slab3.grad(phi)
    assert np.abs(lagrangian_curl(slab3, grad, b)).max() < 1e-8


def _u(y):
    return np.stack([np.sin(TP * y[1]) * y[2], np.cos(TP * y[0]) * y[2] ** 2, np.sin(TP * (y[0] + y[1]))])


def _curl_u(y):
    c = np.cos(TP * (y[0] + y[1]))
    return np.stack(
        [TP * c - 2 * np.cos(TP * y[0]) * y[2], np.sin(TP * y[1]) - TP * c,
         -TP * np.sin(TP * y[0]) * y[2] ** 2 - TP * np.cos(TP * y[1]) * y[2]]
    )


def test_lagrangian_curl_chain_rule_oracle():
    # v = u o eta, so curl_eta v must equal (curl u) o eta
    errs = []
    for nv in (24, 48):
        s = Slab(3, 32, nv)
        x = s.coords
        eta = x + 0.04 * np.stack([np.sin(TP * x[1]) * x[2], np.cos(TP * x[0]) * x[2] ** 2, np.sin(TP * x[0]) * x[2]])
        b = build_bundle(s, eta)
        errs.append(np.abs(lagrangian_curl(s, _u(eta), b) - _curl_u(eta)).max())
    assert errs[1] < 1e-7
    assert np.log(errs[0] / errs[1]) / np.log(47 / 23) > 5.0


def test_lagrangian_div_examples(slab3):
    x = slab3.coords
    F = np.zeros_like(x)
    F[2] = x[2]
    np.testing.assert_allclose(lagrangian_div(slab3, F, build_bundle(slab3, x)), 1.0, atol=1e-11)
    L = 2 * np.eye(3)
    b = build_bundle(slab3, 2 * x, linear_part=L)
    G = np.stack([np.sin(TP * x[0]) / TP, np.sin(TP * x[1]) / TP, x[2]])
    expected = 0.5 * (np.cos(TP * x[0]) + np.cos(TP * x[1]) + 1)
    np.testing.assert_allclose(lagrangian_div(slab3, G, b), expected, atol=1e-11)
    assert np.allclose(lagrangian_div(slab3, G, b)[0, 0], 1.5)


def test_curl_needs_two_dimensions():
    s = Slab(1, 1, 12)
    with pytest.raises(DimensionError):
        lagrangian_curl(s, s.coords, build_bundle(s, s.coords))


def test_leibniz_time_derivatives_match_polynomial_path():
    # eta(t) = x + t v + t^2 w: M(t) polynomial, so J(t) derivatives are exact
    s = Slab(2, 8, 12)
    x = s.coords
    v = np.stack([np.sin(TP * x[0]) * x[1], x[1] ** 2])
    w = np.stack([x[1] ** 3, np.cos(TP * x[0]) * x[1]])
    M = [build_bundle(s, x).Deta, s.grad(v), 2 * s.grad(w), 0 * s.grad(w)]
    J_lv, A_lv = jacobian_time_derivatives(M)
    t = 1e-3
    J = lambda tt: build_bundle(s, x + tt * v + tt**2 * w).J  # noqa: E731
    fd1 = (J(t) - J(-t)) / (2 * t)
    fd2 = (J(t) - 2 * J(0) + J(-t)) / t**2
    np.testing.assert_allclose(J_lv[1], fd1, atol=1e-5)
    np.testing.assert_allclose(J_lv[2], fd2, atol=1e-4)
    w2 = leibniz_inverse_power(J_lv, 2)
    np.testing.assert_allclose(w2[1], -2 * J_lv[1] / J_lv[0] ** 3, atol=1e-12)
    a_lv = cofactor_levels(J_lv, A_lv)
    a = lambda tt: build_bundle(s, x + tt * v + tt**2 * w).a  # noqa: E731
    np.testing.assert_allclose(a_lv[1], (a(t) - a(-t)) / (2 * t), atol=1e-5)
