"""Sobolev-type norms on the slab and empirical checks of the standard inequalities.

Interior norms sum mixed partial derivatives over distinct multi-indices.
Fractional interior orders use the geometric interpolation
``||f||_{k+theta} ~ ||f||_k^{1-theta} ||f||_{k+1}^theta``, which is equivalent
to an interpolation norm only up to constants; the inequality checks below are
about constants, so that is enough. Boundary norms are exact Fourier
multipliers on the torus and cover negative orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import floor

import numpy as np

from .grid import Slab

__all__ = [
    "derivative_tower",
    "interior_norm",
    "fractional_norm",
    "boundary_norm",
    "dual_interior_norm",
    "weighted_norm",
    "divergence",
    "curl",
    "CheckResult",
    "TraceReport",
    "HodgeReport",
    "embedding_check",
    "trace_check",
    "hodge_check",
    "random_field",
]


def derivative_tower(slab: Slab, f: np.ndarray, k: int, linear_part=None, is_map: bool = False) -> dict:
    """All mixed derivatives of order ``<= k`` keyed by sorted axis tuples.

    Axes are 0-based (``dim - 1`` is vertical). For a map ``eta = L x + p``
    with ``p`` periodic, pass ``is_map=True``: derivatives are taken of ``p``
    and the constant columns of ``L`` are added back at first order.
    """
    f = np.asarray(f, dtype=float)
    if is_map:
        L = np.eye(slab.dim) if linear_part is None else np.asarray(linear_part, dtype=float)
        base = f - np.einsum("ij,j...->i...", L, slab.coords)
    else:
        base = f
    tower = {(): f}
    raw = {(): base}
    for order in range(1, k + 1):
        for alpha in combinations_with_replacement(range(slab.dim), order):
            raw[alpha] = slab.d(raw[alpha[:-1]], alpha[-1])
            tower[alpha] = raw[alpha]
            if is_map and order == 1:
                shape = (slab.dim,) + (1,) * slab.dim
                tower[alpha] = raw[alpha] + L[:, alpha[0]].reshape(shape)
    return tower


def _sq(slab: Slab, f: np.ndarray) -> float:
    return slab.l2(f) ** 2


def interior_norm(slab: Slab, f: np.ndarray, k: int, linear_part=None, is_map: bool = False) -> float:
    """``(sum_{|alpha| <= k} ||d^alpha f||_0^2)^{1/2}``; ``k`` in 0..4."""
    if not 0 <= k <= 4 or int(k) != k:
        raise ValueError("interior_norm order must be an integer in 0..4")
    tower = derivative_tower(slab, f, int(k), linear_part, is_map)
    return float(np.sqrt(sum(_sq(slab, g) for g in tower.values())))


def fractional_norm(slab: Slab, f: np.ndarray, s: float, linear_part=None, is_map: bool = False) -> float:
    """Geometric interpolation between the neighbouring integer orders."""
    if s < 0:
        raise ValueError("fractional_norm needs s >= 0; use dual_interior_norm for H^1 dual")
    k = floor(s)
    theta = s - k
    lo = interior_norm(slab, f, k, linear_part, is_map)
    if theta == 0.0:
        return lo
    hi = interior_norm(slab, f, k + 1, linear_part, is_map)
    if lo == 0.0:
        return 0.0
    return float(lo ** (1 - theta) * hi**theta)


def _wavenumber_sq(slab: Slab) -> np.ndarray:
    n = slab.n_horizontal
    xi = np.fft.fftfreq(n, d=1.0 / n)
    grids = np.meshgrid(*([xi] * (slab.dim - 1)), indexing="ij")
    return sum((2 * np.pi * g) ** 2 for g in grids)


def boundary_norm(slab: Slab, trace: np.ndarray, s: float) -> float:
    """``(sum_xi (1 + |2 pi xi|^2)^s |f_hat(xi)|^2)^{1/2}`` on the torus Gamma.

    ``trace`` has shape ``slab.horizontal_shape`` (leading component axes are
    summed in quadrature). In 1D Gamma is a point and this is ``|f|``.
    """
    trace = np.asarray(trace, dtype=float)
    if slab.dim == 1:
        return float(np.sqrt(np.sum(trace**2)))
    axes = tuple(range(trace.ndim - (slab.dim - 1), trace.ndim))
    coef = np.fft.fftn(trace, axes=axes, norm="forward")
    weight = (1.0 + _wavenumber_sq(slab)) ** s
    return float(np.sqrt(np.sum(weight * np.abs(coef) ** 2)))


def _neumann_resolvent(slab: Slab, f: np.ndarray) -> np.ndarray:
    """Solve ``(I - Lap) u = f``: periodic horizontally, ``u_{,v} = 0`` at both ends."""
    nv = slab.n_vertical
    Dv = slab.Dv
    D2 = Dv @ Dv
    if slab.dim == 1:
        kap = np.zeros(1)
        fh = f.reshape(1, nv).astype(complex)
    else:
        kap = _wavenumber_sq(slab).ravel()
        axes = tuple(range(slab.dim - 1))
        fh = np.fft.fftn(f, axes=axes).reshape(-1, nv)
    eye = np.eye(nv)
    mats = (1.0 + kap)[:, None, None] * eye - D2
    mats[:, 0, :] = Dv[0]
    mats[:, -1, :] = Dv[-1]
    rhs = fh.copy()
    rhs[:, 0] = 0.0
    rhs[:, -1] = 0.0
    uh = np.linalg.solve(mats, rhs[..., None])[..., 0]
    if slab.dim == 1:
        return uh.real.reshape(nv)
    uh = uh.reshape(slab.horizontal_shape + (nv,))
    return np.fft.ifftn(uh, axes=tuple(range(slab.dim - 1))).real


def dual_interior_norm(slab: Slab, f: np.ndarray) -> float:
    """Norm in the dual of H^1: ``||u||_1`` where ``(I - Lap) u = f``.

    Leading component axes are handled componentwise and summed in quadrature.
    """
    f = np.asarray(f, dtype=float)
    flat = f.reshape((-1,) + slab.shape)
    total = 0.0
    for comp in flat:
        if not np.any(comp):
            continue
        u = _neumann_resolvent(slab, comp)
        total += interior_norm(slab, u, 1) ** 2
    return float(np.sqrt(total))


def weighted_norm(slab: Slab, f: np.ndarray, p: int, with_gradient: bool = True) -> float:
    """``(int d^p (|f|^2 + |Df|^2))^{1/2}`` with ``d = 1 - x_v``."""
    if p not in (1, 2):
        raise ValueError("weight exponent p must be 1 or 2")
    f = np.asarray(f, dtype=float)
    w = slab.distance_to_top**p
    integrand = (f**2).reshape((-1,) + slab.shape).sum(axis=0)
    if with_gradient:
        G = slab.grad(f)
        integrand = integrand + (G**2).reshape((-1,) + slab.shape).sum(axis=0)
    return float(np.sqrt(max(slab.integrate(w * integrand), 0.0)))


def divergence(slab: Slab, F: np.ndarray) -> np.ndarray:
    return sum(slab.d(F[k], k) for k in range(slab.dim))


def curl(slab: Slab, F: np.ndarray) -> np.ndarray:
    """Scalar curl in 2D, vector curl in 3D."""
    if slab.dim == 2:
        return slab.d(F[1], 0) - slab.d(F[0], 1)
    if slab.dim == 3:
        d = slab.d
        return np.stack(
            [d(F[2], 1) - d(F[1], 2), d(F[0], 2) - d(F[2], 0), d(F[1], 0) - d(F[0], 1)]
        )
    raise ValueError("curl needs dim 2 or 3")


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0.0:
        return 0.0
    return lhs / rhs if rhs > 0 else np.inf


@dataclass
class CheckResult:
    lhs: float
    rhs: float
    ratio: float


def embedding_check(slab: Slab, F: np.ndarray, p: int) -> CheckResult:
    """Weighted embedding: ``||F||_{1-p/2}`` against the ``d^p``-weighted H^1 norm."""
    lhs = fractional_norm(slab, F, 1.0 - p / 2.0)
    rhs = weighted_norm(slab, F, p, with_gradient=True)
    return CheckResult(lhs, rhs, _ratio(lhs, rhs))


@dataclass
class TraceReport:
    """Normal and tangential ``H^{-1/2}(Gamma)`` traces against interior bounds."""

    normal: CheckResult
    tangential: list = field(default_factory=list)  # one CheckResult per tangent

    @property
    def max_ratio(self) -> float:
        return max([self.normal.ratio] + [t.ratio for t in self.tangential])


def trace_check(slab: Slab, w: np.ndarray) -> TraceReport:
    """Traces of ``w`` on the flat top boundary, where ``N = e_v`` and ``T_alpha = e_alpha``.

    Normal: ``|w.N|_{-1/2} <= C (||w||_0 + ||div w||_{(H^1)'})``.
    Tangential: the same with ``curl w`` in place of ``div w``.
    """
    if slab.dim < 2:
        raise ValueError("trace_check needs dim 2 or 3")
    w0 = slab.l2(w)
    lhs_n = boundary_norm(slab, slab.top(w[-1]), -0.5)
    rhs_n = w0 + dual_interior_norm(slab, divergence(slab, w))
    rhs_t = w0 + dual_interior_norm(slab, curl(slab, w))
    tangential = []
    for alpha in range(slab.dim - 1):
        lhs_t = boundary_norm(slab, slab.top(w[alpha]), -0.5)
        tangential.append(CheckResult(lhs_t, rhs_t, _ratio(lhs_t, rhs_t)))
    return TraceReport(CheckResult(lhs_n, rhs_n, _ratio(lhs_n, rhs_n)), tangential)


@dataclass
class HodgeReport:
    lhs: float
    l2: float
    curl: float
    div: float
    boundary_normal: float
    boundary_tangential: float

    @property
    def rhs_normal(self) -> float:
        return self.l2 + self.curl + self.div + self.boundary_normal

    @property
    def rhs_tangential(self) -> float:
        return self.l2 + self.curl + self.div + self.boundary_tangential

    @property
    def ratio_normal(self) -> float:
        return _ratio(self.lhs, self.rhs_normal)

    @property
    def ratio_tangential(self) -> float:
        return _ratio(self.lhs, self.rhs_tangential)


def hodge_check(slab: Slab, F: np.ndarray, s: int) -> HodgeReport:
    """``||F||_s`` against ``||F||_0 + ||curl F||_{s-1} + ||div F||_{s-1}`` plus a boundary piece.

    The boundary piece is ``|dbar F . N|_{s-3/2}`` (normal variant) or
    ``|dbar F . T|_{s-3/2}`` summed over tangents (tangential variant).
    """
    if s not in (1, 2, 3, 4):
        raise ValueError("hodge_check order s must be an integer in 1..4")
    if slab.dim < 2:
        raise ValueError("hodge_check needs dim 2 or 3")
    lhs = interior_norm(slab, F, s)
    l2 = slab.l2(F)
    c = interior_norm(slab, curl(slab, F), s - 1)
    dv = interior_norm(slab, divergence(slab, F), s - 1)
    bn_sq, bt_sq = 0.0, 0.0
    for beta in range(1, slab.dim):
        dF = slab.top(slab.d_bar(F, beta))
        bn_sq += boundary_norm(slab, dF[-1], s - 1.5) ** 2
        bt_sq += boundary_norm(slab, dF[:-1], s - 1.5) ** 2
    return HodgeReport(lhs, l2, c, dv, float(np.sqrt(bn_sq)), float(np.sqrt(bt_sq)))


def random_field(
    slab: Slab,
    rng: np.random.Generator,
    components: int = 0,
    n_modes: int = 4,
    k_max: int = 3,
    m_max: int = 3,
) -> np.ndarray:
    """Smooth band-limited field: horizontal Fourier modes times vertical cosines.

    Horizontal wavenumbers are at most ``k_max`` and vertical profiles are
    ``cos(m pi x_v + phase)`` with ``m <= m_max``, so the field is resolved on
    any slab with at least 16 nodes per direction.
    """
    x = slab.coords
    z = x[-1]
    lead = (components,) if components else ()
    out = np.zeros(lead + slab.shape)
    for idx in np.ndindex(*lead):
        acc = np.zeros(slab.shape)
        for _ in range(n_modes):
            amp = rng.normal()
            phase_h, phase_v = rng.uniform(0, 2 * np.pi, size=2)
            arg = np.full(slab.shape, phase_h)
            for a in range(slab.dim - 1):
                arg = arg + 2 * np.pi * rng.integers(-k_max, k_max + 1) * x[a]
            m = rng.integers(0, m_max + 1)
            acc += amp * np.cos(arg) * np.cos(m * np.pi * z + phase_v)
        out[idx] = acc
    return out
