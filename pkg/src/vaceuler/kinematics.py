"""Deformation gradient, Jacobian, cofactor matrix and surface geometry.

Index conventions follow the component layout of :mod:`vaceuler.grid`:

* ``Deta[r, s] = eta^r_{,s}`` (row: component, column: derivative);
* ``A[k, i] = (Deta^{-1})[k, i]`` so that ``d/dy_i = A[k, i] d/dx_k``;
* ``a[k, i] = J A[k, i]``, the adjugate. Its columns are divergence free
  (``sum_k d_k a[k, i] = 0``, the Piola identity).

On the top surface, row ``dim - 1`` of ``a`` is ``eta_{,1} x eta_{,2}`` in 3D
(``(-eta^2_{,1}, eta^1_{,1})`` in 2D), so ``sqrt(g) = |a[dim-1, :]|`` and the unit
normal is ``a[dim-1, :] / sqrt(g)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .errors import DimensionError, SingularJacobian
from .grid import Slab

J_SINGULAR = 1e-10

__all__ = [
    "KinematicBundle",
    "build_bundle",
    "deformation_gradient",
    "det_and_adjugate",
    "piola_residual",
    "check_time_identities",
    "check_horizontal_identities",
    "lagrangian_curl",
    "lagrangian_div",
    "lagrangian_gradient",
    "eulerian_curl",
    "jacobian_time_derivatives",
    "IdentityReport",
]


def deformation_gradient(slab: Slab, eta: np.ndarray, linear_part=None) -> np.ndarray:
    """``D eta`` for a map ``eta = L x + (periodic in the horizontal directions)``.

    ``linear_part`` is the ``dim x dim`` matrix ``L`` (only its horizontal
    columns matter); the default is the identity, which covers every map that
    starts as ``eta(x, 0) = x`` and moves with a periodic velocity.
    """
    dim = slab.dim
    L = np.eye(dim) if linear_part is None else np.asarray(linear_part, dtype=float)
    q = np.array(eta, dtype=float, copy=True)
    x = slab.coords
    for alpha in range(dim - 1):
        q -= L[:, alpha].reshape((dim,) + (1,) * dim) * x[alpha]
    M = slab.grad(q)
    for alpha in range(dim - 1):
        M[:, alpha] += L[:, alpha].reshape((dim,) + (1,) * dim)
    return M


def det_and_adjugate(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise determinant and adjugate of a matrix field ``M[r, s, ...]``."""
    dim = M.shape[0]
    if dim == 1:
        return M[0, 0].copy(), np.ones_like(M)
    if dim == 2:
        adj = np.empty_like(M)
        adj[0, 0] = M[1, 1]
        adj[0, 1] = -M[0, 1]
        adj[1, 0] = -M[1, 0]
        adj[1, 1] = M[0, 0]
        return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0], adj
    # Row k of adj(M) is the cross product of columns k+1 and k+2 of M.
    cols = [M[:, 0], M[:, 1], M[:, 2]]
    adj = np.empty_like(M)
    for k in range(3):
        adj[k] = np.cross(cols[(k + 1) % 3], cols[(k + 2) % 3], axis=0)
    J = np.einsum("i...,i...->...", adj[0], cols[0])
    return J, adj


@dataclass(frozen=True, eq=False)
class KinematicBundle:
    """All pointwise kinematic quantities of one Lagrangian map."""

    slab: Slab
    Deta: np.ndarray
    J: np.ndarray
    A: np.ndarray
    a: np.ndarray
    g: np.ndarray | None = None  # surface metric on the top boundary (3D only)
    sqrt_g: np.ndarray | None = None
    n: np.ndarray | None = None
    tangents: tuple = field(default=())


def build_bundle(slab: Slab, eta: np.ndarray, linear_part=None, check: bool = True) -> KinematicBundle:
    """Build the kinematic bundle of ``eta``; raises SingularJacobian if J <= 1e-10."""
    eta = slab.check(eta, components=1)
    M = deformation_gradient(slab, eta, linear_part)
    J, adj = det_and_adjugate(M)
    if check:
        bad = J <= J_SINGULAR
        if np.any(bad):
            node = np.unravel_index(int(np.argmin(J)), J.shape)
            raise SingularJacobian(node, J[node])
    A = adj / J
    dim = slab.dim
    top = adj[dim - 1, :, ..., -1]
    sqrt_g = np.sqrt(np.sum(top**2, axis=0))
    n = top / sqrt_g
    g = None
    tangents: tuple = ()
    if dim >= 2:
        tan = [M[:, alpha, ..., -1] for alpha in range(dim - 1)]
        tangents = tuple(t / np.sqrt(np.sum(t**2, axis=0)) for t in tan)
        if dim == 3:
            g = np.empty((2, 2) + top.shape[1:])
            for al in range(2):
                for be in range(2):
                    g[al, be] = np.sum(tan[al] * tan[be], axis=0)
    return KinematicBundle(slab, M, J, A, adj, g, sqrt_g, n, tangents)


# -- differential operators under the pullback ---------------------------------


def lagrangian_gradient(slab: Slab, f: np.ndarray, bundle: KinematicBundle) -> np.ndarray:
    """Eulerian gradient pulled back, ``A^s_j f_{,s}``, for scalar or vector ``f``."""
    Df = slab.grad(f)
    if f.ndim == slab.dim:
        return np.einsum("s...,sj...->j...", Df, bundle.A)
    return np.einsum("ks...,sj...->kj...", Df, bundle.A)


def _velocity_gradient(slab: Slab, v: np.ndarray, bundle: KinematicBundle) -> np.ndarray:
    """``G[k, j] = A[s, j] v^k_{,s}``: Eulerian velocity gradient at eta(x)."""
    return lagrangian_gradient(slab, v, bundle)


def _curl_from_gradient(G: np.ndarray) -> np.ndarray:
    dim = G.shape[0]
    if dim == 2:
        # planar vorticity, (x_1, x_v) treated as a right-handed plane
        return G[1, 0] - G[0, 1]
    return np.stack([G[2, 1] - G[1, 2], G[0, 2] - G[2, 0], G[1, 0] - G[0, 1]])


def lagrangian_curl(slab: Slab, v: np.ndarray, bundle: KinematicBundle) -> np.ndarray:
    """``eps_ijk A^s_j v^k_{,s}``; a scalar field in 2D, a vector field in 3D."""
    if slab.dim == 1:
        raise DimensionError("curl is not defined in 1D")
    return _curl_from_gradient(_velocity_gradient(slab, v, bundle))


def lagrangian_div(slab: Slab, F: np.ndarray, bundle: KinematicBundle) -> np.ndarray:
    """``A^j_i F^i_{,j}``."""
    DF = slab.grad(F)
    return np.einsum("ij...,ji...->...", DF, bundle.A)


def eulerian_curl(slab: Slab, u: np.ndarray) -> np.ndarray:
    """Curl in reference coordinates (the Lagrangian curl at eta = identity)."""
    if slab.dim == 1:
        raise DimensionError("curl is not defined in 1D")
    return _curl_from_gradient(slab.grad(u))


# -- identities ----------------------------------------------------------------


def piola_residual(bundle: KinematicBundle) -> float:
    """``max_i sup |a^k_{i,k}|``: zero in the continuum, O(h^p) discretely."""
    slab = bundle.slab
    div = sum(slab.d(bundle.a[k], k) for k in range(slab.dim))
    return float(np.max(np.abs(div)))


@dataclass
class IdentityReport:
    """Named residuals of an identity check. ``scale`` normalizes to relative."""

    residuals: dict[str, float]
    scales: dict[str, float]

    def relative(self) -> dict[str, float]:
        return {
            k: (v / self.scales[k] if self.scales[k] > 0 else v)
            for k, v in self.residuals.items()
        }


def _sup(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def check_time_identities(slab: Slab, eta0, v0, eta1, delta: float, linear_part=None) -> IdentityReport:
    """Forward-difference check of dJ/dt = a^s_r v^r_{,s} and of da/dt.

    ``(eta0, v0)`` is the state at ``t`` and ``eta1`` the map at ``t + delta``.
    Residuals are O(delta).
    """
    b0 = build_bundle(slab, eta0, linear_part)
    b1 = build_bundle(slab, eta1, linear_part)
    Dv = slab.grad(v0)
    Jt = np.einsum("sr...,rs...->...", b0.a, Dv)
    dJ = (b1.J - b0.J) / delta
    # da^k_i/dt = v^r_{,s} J^{-1} [a^s_r a^k_i - a^s_i a^k_r]
    at = (
        np.einsum("rs...,sr...,ki...->ki...", Dv, b0.a, b0.a)
        - np.einsum("rs...,si...,kr...->ki...", Dv, b0.a, b0.a)
    ) / b0.J
    da = (b1.a - b0.a) / delta
    return IdentityReport(
        residuals={"J2": _sup(dJ - Jt), "a2": _sup(da - at)},
        scales={"J2": max(_sup(Jt), _sup(dJ)), "a2": max(_sup(at), _sup(da))},
    )


def check_horizontal_identities(slab: Slab, eta, linear_part=None) -> IdentityReport:
    """Check the horizontal-derivative identities for J and a, plus n = a^3/sqrt(g).

    Left-hand sides differentiate J and a directly; right-hand sides use only
    ``d_bar`` of ``D eta`` and the cofactor algebra.
    """
    b = build_bundle(slab, eta, linear_part)
    res: dict[str, float] = {}
    scale: dict[str, float] = {}
    for alpha in range(1, slab.dim):
        dM = slab.d_bar(b.Deta, alpha)
        lhs_J = slab.d_bar(b.J, alpha)
        rhs_J = np.einsum("sr...,rs...->...", b.a, dM)
        lhs_a = slab.d_bar(b.a, alpha)
        rhs_a = (
            np.einsum("rs...,sr...,ki...->ki...", dM, b.a, b.a)
            - np.einsum("rs...,si...,kr...->ki...", dM, b.a, b.a)
        ) / b.J
        res[f"J1_{alpha}"] = _sup(lhs_J - rhs_J)
        scale[f"J1_{alpha}"] = max(_sup(lhs_J), _sup(b.J))
        res[f"a1_{alpha}"] = _sup(lhs_a - rhs_a)
        scale[f"a1_{alpha}"] = max(_sup(lhs_a), _sup(b.a))
    if slab.dim >= 2:
        top = b.Deta[..., -1]
        if slab.dim == 3:
            cross = np.cross(top[:, 0], top[:, 1], axis=0)
        else:
            cross = np.stack([-top[1, 0], top[0, 0]])
        n_geo = cross / np.sqrt(np.sum(cross**2, axis=0))
        res["n"] = _sup(n_geo - b.n)
        scale["n"] = 1.0
        res["n_unit"] = _sup(np.sum(b.n**2, axis=0) - 1.0)
        scale["n_unit"] = 1.0
        res["n_perp"] = max(_sup(np.sum(b.n * top[:, al], axis=0)) for al in range(slab.dim - 1))
        scale["n_perp"] = max(_sup(top[:, al]) for al in range(slab.dim - 1))
    return IdentityReport(res, scale)


# -- time derivatives of J and A by the Leibniz rule ---------------------------


def jacobian_time_derivatives(M_levels, J0=None, adj0=None):
    """Time derivatives of ``J = det M`` and ``A = M^{-1}`` from those of ``M``.

    ``M_levels[m] = d^m/dt^m D eta``. Uses ``A' = -A M' A`` and
    ``J' = J tr(A M')`` expanded with the Leibniz rule; level ``m`` of the
    outputs needs ``M_levels[0..m]`` only. Returns ``(J_levels, A_levels)``.
    """
    M0 = M_levels[0]
    if J0 is None or adj0 is None:
        J0, adj0 = det_and_adjugate(M0)
    A_levels = [adj0 / J0]
    J_levels = [J0]
    T_levels: list[np.ndarray] = []  # derivatives of tr(A M')
    for m in range(1, len(M_levels)):
        # A^(m) = -sum_{l<m} C(m,l) A^(l) M^(m-l) A
        acc = np.zeros_like(A_levels[0])
        for l in range(m):
            acc += comb(m, l) * np.einsum("ij...,jk...->ik...", A_levels[l], M_levels[m - l])
        A_levels.append(-np.einsum("ik...,kj...->ij...", acc, A_levels[0]))
        # T^(m-1) = sum_l C(m-1,l) tr(A^(l) M^(m-l))
        n = m - 1
        T = np.zeros_like(J0)
        for l in range(n + 1):
            T += comb(n, l) * np.einsum("ij...,ji...->...", A_levels[l], M_levels[n - l + 1])
        T_levels.append(T)
        Jm = np.zeros_like(J0)
        for l in range(n + 1):
            Jm += comb(n, l) * J_levels[l] * T_levels[n - l]
        J_levels.append(Jm)
    return J_levels, A_levels


def leibniz_inverse_power(J_levels, power: int):
    """Time derivatives of ``J^{-power}`` (power 1 or 2) from those of J."""
    if power == 1:
        base = J_levels
    elif power == 2:
        base = [
            sum(comb(m, l) * J_levels[l] * J_levels[m - l] for l in range(m + 1))
            for m in range(len(J_levels))
        ]
    else:
        raise ValueError("power must be 1 or 2")
    out = [1.0 / base[0]]
    for m in range(1, len(base)):
        s = sum(comb(m, l) * base[l] * out[m - l] for l in range(1, m + 1))
        out.append(-s / base[0])
    return out


def cofactor_levels(J_levels, A_levels):
    """Time derivatives of ``a = J A`` by the Leibniz rule."""
    return [
        sum(comb(m, l) * J_levels[l] * A_levels[m - l] for l in range(m + 1))
        for m in range(len(J_levels))
    ]


def horizontal_multi_indices(dim: int, order: int):
    """All multi-indices of ``order`` horizontal derivatives as direction tuples."""
    if order == 0:
        return [()]
    if dim < 2:
        return []
    return list(combinations_with_replacement(range(1, dim), order))
