"""Run orchestration: build the problem from a RunConfig, integrate, record diagnostics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .dynamics import (
    InitialData,
    State,
    build_dt_stack,
    density_profile,
    mass_residual,
    max_stable_dt,
    step,
    time_derivatives,
    validate_initial_data,
    velocity_profile,
)
from .energy import (
    BoundMonitor,
    bound_monitor,
    cauchy_invariant_at,
    curl_transport_at,
    energy,
    physical_energy,
)
from .errors import CFLViolation, FieldError, SingularJacobian
from .grid import Slab
from .kinematics import piola_residual
from .norms import fractional_norm

log = logging.getLogger(__name__)

__all__ = ["Trajectory", "build_problem", "simulate", "RECORD_COLUMNS", "ETA_CAP"]

J_BAND = (0.5, 1.5)
ETA_CAP = 3.0  # 2 |Omega|^2 + 1 with |Omega| = 1

_E_COLUMNS = (
    ["E_total"]
    + [f"E_sobolev_{a}" for a in range(5)]
    + [f"E_weighted_Deta_{a}" for a in range(5)]
    + [f"E_weighted_v_{a}" for a in range(5)]
    + [f"E_jacobian_{a}" for a in range(4)]
    + ["E_curl", "E_weighted_curl"]
)

RECORD_COLUMNS = (
    ["t", "step", "J_min", "J_max", "eta_top_mean", "eta_top_max", "v_wall_max", "bottom_cofactor",
     "physical_energy", "physical_energy_drift"]
    + _E_COLUMNS
    + ["piola_residual", "mass_residual", "stack_fd_residual", "curl_transport", "cauchy_residual",
       "eta_norm_sq_3p5", "J_ok", "eta_cap_ok", "v_cap_ok"]
)


@dataclass
class Trajectory:
    """States at diagnostic times plus one record per cadence point."""

    config: RunConfig
    data: InitialData
    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    reason: str = "running"
    message: str = ""
    monitor: BoundMonitor | None = None
    computed_mask: dict = field(default_factory=dict)
    dt: float = float("nan")

    @property
    def healthy(self) -> bool:
        return self.reason == "completed"

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)


def build_problem(config: RunConfig) -> InitialData:
    sc, ic = config.slab, config.initial_data
    n_h = sc.n_horizontal if sc.dim > 1 else 1
    slab = Slab(sc.dim, n_h, sc.n_vertical, sc.order, sc.vertical_scheme)
    rho0 = density_profile(slab, ic.density)
    u0 = velocity_profile(slab, ic.velocity, ic.amplitude)
    return InitialData(slab, rho0, u0, ic.vacuum_slope_check)


def _v_cap_norms(stack, K, slab):
    """``||d_t^a v||^2_{3 - a/2}`` for the levels the stack provides."""
    return [fractional_norm(slab, stack[a + 1], 3.0 - a / 2.0) ** 2 for a in range(min(6, K - 1) + 1)]


class _Recorder:
    def __init__(self, config: RunConfig, data: InitialData, dt: float):
        self.config = config
        self.data = data
        self.dt = dt
        self.K = config.dynamics.stack_depth
        self.form = config.dynamics.form
        self.pe0 = None
        self.v_caps0 = None

    def record(self, state: State, n: int) -> tuple[dict, State, dict]:
        cfg, data, slab = self.config, self.data, state.slab
        b = state.bundle
        stacked = build_dt_stack(state, data, self.K, self.form)
        pe = physical_energy(state, data)
        if self.pe0 is None:
            self.pe0 = pe
        e = energy(stacked, data, self.K, self.form)
        row = {
            "t": state.t,
            "step": n,
            "J_min": float(b.J.min()),
            "J_max": float(b.J.max()),
            "eta_top_mean": float(slab.integrate_boundary(slab.top(state.eta[-1]))),
            "eta_top_max": float(slab.top(state.eta[-1]).max()),
            "v_wall_max": float(np.abs(slab.bottom(state.v[-1])).max()),
            "bottom_cofactor": float(np.abs(slab.bottom(b.a[-1, :-1])).max()) if slab.dim > 1 else float("nan"),
            "physical_energy": pe,
            "physical_energy_drift": (pe - self.pe0) / self.pe0,
        }
        row.update(e.columns())
        row["piola_residual"] = piola_residual(b)
        mass, fd = float("nan"), float("nan")
        if cfg.dynamics.stack_check and self.K >= 2:
            mass, fd = self._cross_check(state)
        row["mass_residual"] = mass
        row["stack_fd_residual"] = fd
        row["curl_transport"] = curl_transport_at(stacked, data) if slab.dim > 1 else float("nan")
        row["cauchy_residual"] = cauchy_invariant_at(state, data.u0) if slab.dim == 2 else float("nan")
        eta_sq = fractional_norm(slab, state.eta, 3.5, is_map=True) ** 2
        row["eta_norm_sq_3p5"] = eta_sq
        caps = _v_cap_norms(stacked.dt_stack, self.K, slab)
        if self.v_caps0 is None:
            self.v_caps0 = caps
        row["J_ok"] = bool(J_BAND[0] <= row["J_min"] and row["J_max"] <= J_BAND[1])
        row["eta_cap_ok"] = bool(eta_sq <= ETA_CAP)
        row["v_cap_ok"] = bool(all(c <= 2 * c0 + 1 for c, c0 in zip(caps, self.v_caps0)))
        return row, stacked, e.mask_columns()

    def _cross_check(self, state: State) -> tuple[float, float]:
        """Mass-equation residual and the stack-versus-finite-difference residual.

        Both use the states one step ``dt`` ahead and behind along the integrator.
        """
        data, dt, K, form = self.data, self.dt, self.K, self.form
        try:
            ahead = step(state, data, dt, form, cfl=None)
            behind = step(state, data, -dt, form, cfl=None)
        except SingularJacobian:
            return float("nan"), float("nan")
        mass = mass_residual(behind, state, ahead, data)
        levels = [time_derivatives(s, data, K, form, enforce_wall=True).eta for s in (behind, state, ahead)]
        worst = 0.0
        for k in range(1, K):
            fd = (levels[2][k] - levels[0][k]) / (2 * dt)
            exact = levels[1][k + 1]
            scale = max(float(np.abs(exact).max()), 1.0)
            worst = max(worst, float(np.abs(fd - exact).max()) / scale)
        return mass, worst


def _choose_dt(config: RunConfig, state: State, data: InitialData) -> tuple[float, int]:
    T = config.time.T_final
    dt = config.time.dt
    if dt is None:
        dt = 0.9 * max_stable_dt(state, data, config.time.cfl)
    if T == 0:
        return dt, 0
    n = max(1, math.ceil(T / dt - 1e-9))
    return T / n, n


def simulate(config: RunConfig, data: InitialData | None = None) -> Trajectory:
    """Integrate to ``T_final`` or to the first health failure.

    Health failures (J leaving [1/2, 3/2], a tangled map, non-finite values, a
    CFL violation) stop the run; the partial trajectory is returned with the
    reason set. Norm caps are recorded as flags only.
    """
    if data is None:
        data = build_problem(config)
        validate_initial_data(data)
    state = State.initial(data)
    dt, n_steps = _choose_dt(config, state, data)
    stride = max(1, round(config.diagnostics.cadence / dt)) if n_steps else 1
    traj = Trajectory(config, data, dt=dt)
    rec = _Recorder(config, data, dt)
    form = config.dynamics.form

    def emit(s: State, n: int) -> bool:
        row, stacked, mask = rec.record(s, n)
        traj.records.append(row)
        traj.states.append(stacked)
        traj.computed_mask = mask
        if not row["J_ok"]:
            traj.reason = "J_bounds"
            traj.message = f"J left [1/2, 3/2] at t = {s.t:.6g} (J in [{row['J_min']:.4g}, {row['J_max']:.4g}])"
            return False
        return True

    ok = emit(state, 0)
    n = 0
    while ok and n < n_steps:
        try:
            state = step(state, data, dt, form, cfl=config.time.cfl, filter_modes=config.dynamics.filter)
        except CFLViolation as exc:
            traj.reason, traj.message = "cfl_violation", str(exc)
            ok = False
            break
        except SingularJacobian as exc:
            traj.reason, traj.message = "singular_jacobian", str(exc)
            ok = False
            break
        except FieldError:
            traj.reason, traj.message = "non_finite", f"non-finite state after t = {state.t:.6g}"
            ok = False
            break
        n += 1
        if n % stride == 0 or n == n_steps:
            ok = emit(state, n)
    if ok:
        traj.reason = "completed"
    log.info("run finished: %s after %d steps", traj.reason, n)
    diag = config.diagnostics
    traj.monitor = bound_monitor(traj.column("t"), traj.column("E_total"), diag.bound_C, diag.bound_P)
    return traj
