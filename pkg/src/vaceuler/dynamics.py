"""Lagrangian Euler system at gamma = 2: initial data, accelerations, stepping.

The evolved system is ``eta_t = v`` and ``v_t = F(eta)``, where ``F`` is one of

* ``"vorticity"``: ``v_t^i = -2 A^k_i (rho0 / J)_{,k}`` at every node;
* ``"conservative"``: ``rho0 v_t^i = -a^k_i (rho0^2 J^{-2})_{,k}`` divided by
  ``rho0`` at nodes where ``rho0 > 0``, with the vorticity form on the vacuum
  boundary. On an ``"sbp"`` slab this conserves the discrete physical energy
  exactly in 1D and 2D.

The vertical velocity is pinned to zero on the bottom wall after every stage.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from math import comb

import numpy as np

from .errors import (
    BottomBCViolation,
    CFLViolation,
    InteriorVacuum,
    NotPhysicalVacuum,
    StackOverflowOrder,
)
from .grid import Slab
from .kinematics import (
    KinematicBundle,
    build_bundle,
    cofactor_levels,
    jacobian_time_derivatives,
    lagrangian_div,
    leibniz_inverse_power,
)

log = logging.getLogger(__name__)

MAX_STACK = 8
FORMS = ("vorticity", "conservative")

__all__ = [
    "DENSITIES",
    "VELOCITIES",
    "InitialData",
    "VacuumReport",
    "State",
    "StackDerivatives",
    "density_profile",
    "velocity_profile",
    "validate_initial_data",
    "acceleration",
    "acceleration_conservative",
    "acceleration_elliptic",
    "evolution_acceleration",
    "time_derivatives",
    "build_dt_stack",
    "max_stable_dt",
    "step",
    "mass_residual",
    "simulate",
    "sound_speed",
    "FORMS",
    "MAX_STACK",
]


# -- initial data ----------------------------------------------------------------


DENSITIES = ("linear", "quadratic", "square", "constant")
VELOCITIES = ("zero", "gradient", "rotational")


def density_profile(slab: Slab, name: str = "linear") -> np.ndarray:
    """Named initial densities depending on the vertical coordinate only."""
    z = slab.coords[-1]
    profiles = {
        "linear": 1.0 - z,
        "quadratic": 1.0 - z**2,
        "square": (1.0 - z) ** 2,
        "constant": np.ones_like(z),
    }
    try:
        return profiles[name]
    except KeyError:
        raise ValueError(f"unknown density profile {name!r}; choose from {sorted(profiles)}") from None


def velocity_profile(slab: Slab, kind: str = "zero", amplitude: float = 0.0) -> np.ndarray:
    """Named initial velocities, all with zero vertical component on the bottom.

    ``rotational`` and ``gradient`` are odd/even in the vertical coordinate in
    the way a reflection through the wall requires, so they add no extra
    incompatibility at the bottom corner.
    """
    x = slab.coords
    u = np.zeros_like(x)
    dim = slab.dim
    z = x[-1]
    eps = amplitude
    tp = 2 * np.pi
    if kind == "zero":
        return u
    if kind == "gradient":
        if dim == 1:
            u[0] = eps * np.sin(np.pi * z)
            return u
        # u = D phi, phi = eps cos(2 pi x1) cos(pi z)
        u[0] = -eps * tp * np.sin(tp * x[0]) * np.cos(np.pi * z)
        u[-1] = -eps * np.pi * np.cos(tp * x[0]) * np.sin(np.pi * z)
        return u
    if kind == "rotational":
        if dim == 1:
            raise ValueError("rotational velocity needs dim >= 2")
        # u = (psi_z, -psi_x1) for psi = eps sin(2 pi x1) sin(pi z) [cos(2 pi x2) in 3D]
        mod = np.cos(tp * x[1]) if dim == 3 else 1.0
        u[0] = eps * np.pi * np.sin(tp * x[0]) * np.cos(np.pi * z) * mod
        u[-1] = -eps * tp * np.cos(tp * x[0]) * np.sin(np.pi * z) * mod
        return u
    raise ValueError(f"unknown velocity kind {kind!r}")


@dataclass(frozen=True, eq=False)
class InitialData:
    """Initial density and velocity on a common slab."""

    slab: Slab
    rho0: np.ndarray
    u0: np.ndarray
    vacuum_slope_check: float = 1e-6

    @cached_property
    def drho0(self) -> np.ndarray:
        return self.slab.grad(self.rho0)


@dataclass
class VacuumReport:
    """Outcome of :func:`validate_initial_data`."""

    C: float  # empirical constant in rho0 >= C dist(x, Gamma) near Gamma
    normal_slope_max: float  # largest d rho0 / dN on the vacuum boundary
    rho_top_max: float
    rho_interior_min: float
    bottom_velocity_max: float


def validate_initial_data(
    data: InitialData, band: float = 0.25, tol: float = 1e-10
) -> VacuumReport:
    """Check the physical-vacuum conditions and the bottom boundary condition."""
    slab = data.slab
    rho = slab.check(data.rho0)
    u0 = slab.check(data.u0, components=1)
    scale = max(float(np.max(np.abs(rho))), 1.0)
    rho_top = float(np.max(np.abs(slab.top(rho))))
    if rho_top > tol * scale:
        raise NotPhysicalVacuum(f"rho0 does not vanish on the vacuum boundary (max |rho0| = {rho_top:.3g})")
    interior = rho[..., :-1]
    rho_min = float(np.min(interior))
    if rho_min <= 0.0:
        raise InteriorVacuum(f"rho0 <= 0 inside the domain (min = {rho_min:.3g})")
    slope = slab.top(data.drho0[-1])  # outward normal is +x_v
    slope_max = float(np.max(slope))
    if slope_max >= -data.vacuum_slope_check:
        raise NotPhysicalVacuum(
            f"normal slope of rho0 on the vacuum boundary is not negative (max = {slope_max:.3g})"
        )
    dist = slab.distance_to_top
    near = (dist > 0) & (dist <= band)
    C = float(np.min(rho[near] / dist[near]))
    wall = float(np.max(np.abs(slab.bottom(u0[-1]))))
    if wall > tol * max(float(np.max(np.abs(u0))), 1.0):
        raise BottomBCViolation(f"vertical velocity on the bottom wall is {wall:.3g}")
    return VacuumReport(C, slope_max, rho_top, rho_min, wall)


# -- state -----------------------------------------------------------------------


def _frozen(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float, copy=True)
    x.flags.writeable = False
    return x


@dataclass(frozen=True, eq=False)
class State:
    """Immutable snapshot ``(t, eta, v)`` with an optional time-derivative stack."""

    slab: Slab
    t: float
    eta: np.ndarray
    v: np.ndarray
    dt_stack: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "eta", _frozen(self.slab.check(self.eta, components=1)))
        object.__setattr__(self, "v", _frozen(self.slab.check(self.v, components=1)))
        object.__setattr__(self, "dt_stack", tuple(_frozen(x) for x in self.dt_stack))

    @cached_property
    def bundle(self) -> KinematicBundle:
        return build_bundle(self.slab, self.eta)

    @classmethod
    def initial(cls, data: InitialData) -> "State":
        return cls(data.slab, 0.0, data.slab.coords, data.u0)


# -- accelerations ------------------------------------------------------------------


def acceleration(state: State, data: InitialData) -> np.ndarray:
    """``v_t^i = -2 A^k_i (rho0 J^{-1})_{,k}``; depends on eta only."""
    b = state.bundle
    Df = state.slab.grad(data.rho0 / b.J)
    return -2.0 * np.einsum("ki...,k...->i...", b.A, Df)


def acceleration_conservative(state: State, data: InitialData) -> np.ndarray:
    """``-a^k_i (rho0^2 J^{-2})_{,k} / rho0`` on interior nodes.

    The vacuum boundary layer is dropped: the result has one fewer vertical
    node than the slab.
    """
    b = state.bundle
    Dq = state.slab.grad(data.rho0**2 / b.J**2)
    num = np.einsum("ki...,k...->i...", b.a, Dq)
    return -num[..., :-1] / data.rho0[..., :-1]


def acceleration_elliptic(state: State, data: InitialData) -> np.ndarray:
    """``v_t^i = -rho0 a^k_i (J^{-2})_{,k} - 2 rho0_{,k} a^k_i J^{-2}``."""
    b = state.bundle
    w = 1.0 / b.J**2
    Dw = state.slab.grad(w)
    return -(
        data.rho0 * np.einsum("ki...,k...->i...", b.a, Dw)
        + 2.0 * np.einsum("ki...,k...->i...", b.a, data.drho0) * w
    )


def _wall(x: np.ndarray) -> np.ndarray:
    x[-1, ..., 0] = 0.0
    return x


def evolution_acceleration(slab: Slab, eta: np.ndarray, data: InitialData, form: str) -> np.ndarray:
    """Right-hand side of ``v_t`` used by the integrator, wall condition applied."""
    state = State(slab, 0.0, eta, np.zeros_like(eta))
    acc = np.array(acceleration(state, data))
    if form == "conservative":
        acc[..., :-1] = acceleration_conservative(state, data)
    elif form != "vorticity":
        raise ValueError(f"unknown form {form!r}")
    return _wall(acc)


# -- time-derivative stack -------------------------------------------------------------


@dataclass
class StackDerivatives:
    """Time derivatives of eta and of the kinematic quantities built from it."""

    eta: list  # d^k eta / dt^k, k = 0..K
    M: list  # D of the above
    J: list
    A: list
    Jinv2: list  # d^k (J^{-2}) / dt^k


def time_derivatives(
    state: State,
    data: InitialData,
    K: int,
    form: str = "vorticity",
    enforce_wall: bool = False,
) -> StackDerivatives:
    """Exact Leibniz expansion of the equation of motion up to ``d^K eta/dt^K``.

    Level ``m + 2`` uses the derivatives of ``A``, ``J`` (and ``a``) up to order
    ``m`` only. With ``enforce_wall`` the vertical component of every level
    ``k >= 1`` vanishes on the bottom wall, which makes the stack the exact
    time derivative of the semi-discrete system that :func:`step` integrates.
    """
    if K > MAX_STACK:
        raise StackOverflowOrder(f"stack depth {K} exceeds the maximum {MAX_STACK}")
    if K < 1:
        raise StackOverflowOrder("stack depth must be at least 1")
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}")
    slab = state.slab
    rho = data.rho0
    b = state.bundle
    v = np.array(state.v)
    if enforce_wall:
        _wall(v)
    eta_lv = [np.array(state.eta), v]
    M_lv = [b.Deta, slab.grad(v)]
    for m in range(K - 1):
        J_lv, A_lv = jacobian_time_derivatives(M_lv[: m + 1], b.J, b.a)
        f_lv = [rho * x for x in leibniz_inverse_power(J_lv, 1)]
        nxt = np.zeros_like(v)
        for l in range(m + 1):
            nxt += comb(m, l) * np.einsum("ki...,k...->i...", A_lv[l], slab.grad(f_lv[m - l]))
        nxt *= -2.0
        if form == "conservative":
            w_lv = leibniz_inverse_power(J_lv, 2)
            a_lv = cofactor_levels(J_lv, A_lv)
            cons = np.zeros_like(v)
            for l in range(m + 1):
                cons += comb(m, l) * np.einsum("ki...,k...->i...", a_lv[l], slab.grad(rho**2 * w_lv[m - l]))
            nxt[..., :-1] = -cons[..., :-1] / rho[..., :-1]
        if enforce_wall:
            _wall(nxt)
        eta_lv.append(nxt)
        M_lv.append(slab.grad(nxt))
    J_lv, A_lv = jacobian_time_derivatives(M_lv, b.J, b.a)
    return StackDerivatives(eta_lv, M_lv, J_lv, A_lv, leibniz_inverse_power(J_lv, 2))


def build_dt_stack(
    state: State, data: InitialData, K: int = 4, form: str = "vorticity", enforce_wall: bool = False
) -> State:
    """Return ``state`` with ``dt_stack = (eta, v, eta_tt, ..., d^K eta/dt^K)``."""
    d = time_derivatives(state, data, K, form, enforce_wall)
    return replace(state, dt_stack=tuple(d.eta))


# -- time stepping ---------------------------------------------------------------------


def sound_speed(data: InitialData, J: np.ndarray) -> np.ndarray:
    """``c = sqrt(2 rho0 / J)`` (c^2 = dp/drho = 2 rho at gamma = 2)."""
    return np.sqrt(np.maximum(2.0 * data.rho0 / J, 0.0))


def max_stable_dt(state: State, data: InitialData, cfl: float = 0.25) -> float:
    c = float(np.max(sound_speed(data, state.bundle.J)))
    if c == 0.0:
        return np.inf
    return cfl * state.slab.h_min / c


def step(
    state: State,
    data: InitialData,
    dt: float,
    form: str = "vorticity",
    cfl: float | None = 0.25,
    filter_modes: bool = False,
) -> State:
    """One classical RK4 step of ``(eta, v)``; ``dt`` may be negative.

    Raises CFLViolation when ``|dt|`` exceeds ``cfl * h_min / max c`` (skipped
    when ``cfl`` is None) and SingularJacobian if any stage tangles the map.
    """
    slab = state.slab
    if cfl is not None:
        dt_max = max_stable_dt(state, data, cfl)
        if abs(dt) > dt_max:
            raise CFLViolation(abs(dt), dt_max)
    eta0 = np.array(state.eta)
    v0 = _wall(np.array(state.v))

    def rhs(eta, v):
        return v, evolution_acceleration(slab, eta, data, form)

    k1x, k1v = rhs(eta0, v0)
    k2x, k2v = rhs(eta0 + 0.5 * dt * k1x, _wall(v0 + 0.5 * dt * k1v))
    k2x = _wall(k2x)
    k3x, k3v = rhs(eta0 + 0.5 * dt * k2x, _wall(v0 + 0.5 * dt * k2v))
    k3x = _wall(k3x)
    k4x, k4v = rhs(eta0 + dt * k3x, _wall(v0 + dt * k3v))
    k4x = _wall(k4x)
    eta = eta0 + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
    v = _wall(v0 + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v))
    if filter_modes:
        x = slab.coords
        eta = x + slab.filter_horizontal(eta - x)
        v = slab.filter_horizontal(v)
    new = State(slab, state.t + dt, eta, v)
    new.bundle  # raises SingularJacobian on tangling
    return new


def simulate(config, data: InitialData | None = None):
    """Run a configured simulation; see :func:`vaceuler.run.simulate`."""
    from .run import simulate as _simulate

    return _simulate(config, data)


def mass_residual(prev: State, cur: State, nxt: State, data: InitialData) -> float:
    """Sup of ``d_t(rho0/J) + (rho0/J) A^j_i v^i_{,j}`` with a centered difference in t."""
    delta = 0.5 * (nxt.t - prev.t)
    f_prev = data.rho0 / prev.bundle.J
    f_next = data.rho0 / nxt.bundle.J
    f = data.rho0 / cur.bundle.J
    res = (f_next - f_prev) / (2 * delta) + f * lagrangian_div(cur.slab, cur.v, cur.bundle)
    return float(np.max(np.abs(res)))

