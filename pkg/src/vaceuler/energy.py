"""Energies, vorticity diagnostics and the polynomial-inequality bound monitor.

The higher-order energy is

    E = sum_{a=0}^{4} ( ||d_t^{2a} eta||_{4-a}^2
                        + ||rho0 dbar^{4-a} d_t^{2a} D eta||_0^2
                        + ||sqrt(rho0) dbar^{4-a} d_t^{2a} v||_0^2 )
      + sum_{a=0}^{3} ||rho0 d_t^{2a} J^{-2}||_{4-a}^2
      + ||curl_eta v||_3^2 + ||rho0 dbar^4 curl_eta v||_0^2

where ``dbar^k`` runs over all distinct horizontal multi-indices of order k.
Terms whose time derivatives lie beyond the available stack depth are
reported as not computed (NaN with a False mask entry), never as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .dynamics import InitialData, State, acceleration, time_derivatives
from .errors import DimensionError
from .kinematics import horizontal_multi_indices, lagrangian_curl
from .norms import curl, interior_norm

__all__ = [
    "physical_energy",
    "EnergyBreakdown",
    "energy",
    "curl_transport_at",
    "curl_transport_residual",
    "cauchy_invariant_at",
    "cauchy_invariant_residual",
    "BoundMonitor",
    "bound_monitor",
    "quadratic_fixed_point",
]


def physical_energy(state: State, data: InitialData) -> float:
    """``int rho0 |v|^2 / 2 + rho0^2 / J``."""
    slab = state.slab
    kinetic = 0.5 * data.rho0 * np.sum(state.v**2, axis=0)
    internal = data.rho0**2 / state.bundle.J
    return float(slab.integrate(kinetic + internal))


def _hsum(slab, f, order, weight):
    """``sum_beta int weight |dbar^beta f|^2`` over horizontal multi-indices of ``order``."""
    total = 0.0
    for beta in horizontal_multi_indices(slab.dim, order):
        g = f
        for direction in beta:
            g = slab.d_bar(g, direction)
        sq = (g**2).reshape((-1,) + slab.shape).sum(axis=0)
        total += float(slab.integrate(weight * sq))
    return total


_NAN5 = lambda: [float("nan")] * 5  # noqa: E731


@dataclass
class EnergyBreakdown:
    """Summands of the higher-order energy; NaN marks a term not computed."""

    sobolev_terms: list = field(default_factory=_NAN5)
    weighted_Deta_terms: list = field(default_factory=_NAN5)
    weighted_v_terms: list = field(default_factory=_NAN5)
    jacobian_terms: list = field(default_factory=lambda: [float("nan")] * 4)
    curl_term: float = float("nan")
    weighted_curl_term: float = float("nan")
    total: float = 0.0
    computed_mask: dict = field(default_factory=dict)

    def columns(self) -> dict:
        """Flat mapping of CSV column name to value, in a fixed order."""
        row = {"E_total": self.total}
        for a, x in enumerate(self.sobolev_terms):
            row[f"E_sobolev_{a}"] = x
        for a, x in enumerate(self.weighted_Deta_terms):
            row[f"E_weighted_Deta_{a}"] = x
        for a, x in enumerate(self.weighted_v_terms):
            row[f"E_weighted_v_{a}"] = x
        for a, x in enumerate(self.jacobian_terms):
            row[f"E_jacobian_{a}"] = x
        row["E_curl"] = self.curl_term
        row["E_weighted_curl"] = self.weighted_curl_term
        return row

    def mask_columns(self) -> dict:
        keys = list(self.columns())[1:]
        flat = (
            self.computed_mask["sobolev_terms"]
            + self.computed_mask["weighted_Deta_terms"]
            + self.computed_mask["weighted_v_terms"]
            + self.computed_mask["jacobian_terms"]
            + [self.computed_mask["curl_term"], self.computed_mask["weighted_curl_term"]]
        )
        return dict(zip(keys, flat))


def energy(state: State, data: InitialData, K: int | None = None, form: str = "vorticity") -> EnergyBreakdown:
    """Evaluate every summand of the higher-order energy the stack depth allows.

    ``K`` defaults to the depth of ``state.dt_stack`` (or 4 if the state has no
    stack). Time derivatives of ``J^{-2}`` come from the same Leibniz recursion
    as the stack.
    """
    slab = state.slab
    if K is None:
        K = len(state.dt_stack) - 1 if state.dt_stack else 4
    d = time_derivatives(state, data, K, form)
    eta_lv = list(state.dt_stack) if len(state.dt_stack) == K + 1 else d.eta
    rho = data.rho0
    out = EnergyBreakdown()
    mask = {
        "sobolev_terms": [False] * 5,
        "weighted_Deta_terms": [False] * 5,
        "weighted_v_terms": [False] * 5,
        "jacobian_terms": [False] * 4,
        "curl_term": False,
        "weighted_curl_term": False,
    }
    for a in range(5):
        if 2 * a <= K:
            lv = eta_lv[2 * a]
            out.sobolev_terms[a] = interior_norm(slab, lv, 4 - a, is_map=(a == 0)) ** 2
            out.weighted_Deta_terms[a] = _hsum(slab, d.M[2 * a], 4 - a, rho**2)
            mask["sobolev_terms"][a] = mask["weighted_Deta_terms"][a] = True
        if 2 * a + 1 <= K:
            out.weighted_v_terms[a] = _hsum(slab, eta_lv[2 * a + 1], 4 - a, rho)
            mask["weighted_v_terms"][a] = True
    for a in range(4):
        if 2 * a <= K:
            out.jacobian_terms[a] = interior_norm(slab, rho * d.Jinv2[2 * a], 4 - a) ** 2
            mask["jacobian_terms"][a] = True
    if slab.dim > 1:
        w = lagrangian_curl(slab, state.v, state.bundle)
        out.curl_term = interior_norm(slab, w, 3) ** 2
        out.weighted_curl_term = _hsum(slab, w, 4, rho**2)
        mask["curl_term"] = mask["weighted_curl_term"] = True
    out.computed_mask = mask
    terms = [x for k, x in out.columns().items() if k != "E_total" and np.isfinite(x)]
    out.total = float(sum(terms))
    return out


# -- vorticity -------------------------------------------------------------------


def curl_transport_at(state: State, data: InitialData) -> float:
    """Sup of ``curl_eta v_t`` with ``v_t`` the stack's second level."""
    if state.slab.dim == 1:
        raise DimensionError("vorticity transport needs dim >= 2")
    vt = state.dt_stack[2] if len(state.dt_stack) > 2 else acceleration(state, data)
    return float(np.max(np.abs(lagrangian_curl(state.slab, vt, state.bundle))))


def curl_transport_residual(trajectory) -> np.ndarray:
    """``(t, sup |curl_eta v_t|)`` for each stored state of a trajectory."""
    return np.array([(s.t, curl_transport_at(s, trajectory.data)) for s in trajectory.states])


def cauchy_invariant_at(state: State, u0: np.ndarray) -> float:
    """Sup of ``curl_eta v - curl(u0) / J`` (planar only)."""
    if state.slab.dim != 2:
        raise DimensionError("the scalar Cauchy invariant is planar; use dim = 2")
    lhs = lagrangian_curl(state.slab, state.v, state.bundle)
    rhs = curl(state.slab, u0) / state.bundle.J
    return float(np.max(np.abs(lhs - rhs)))


def cauchy_invariant_residual(trajectory, u0: np.ndarray) -> np.ndarray:
    return np.array([(s.t, cauchy_invariant_at(s, u0)) for s in trajectory.states])


# -- bound monitor -----------------------------------------------------------------


@dataclass
class BoundMonitor:
    """Check of the proxy bound ``E(t) <= 2 M0`` up to ``T_star = M0 / (C P(2 M0))``."""

    M0: float
    C: float
    P: tuple
    T_star: float
    times: np.ndarray
    series: np.ndarray
    first_violation: float | None = None

    @property
    def holds(self) -> bool:
        return self.first_violation is None

    def report(self) -> dict:
        return {
            "M0": self.M0,
            "C": self.C,
            "P": list(self.P),
            "T_star": self.T_star,
            "max_ratio_to_M0": float(np.max(self.series) / self.M0) if self.M0 else float("nan"),
            "holds": self.holds,
            "first_violation": self.first_violation,
        }


def bound_monitor(times, series, C: float = 1.0, P=(0.0, 0.0, 1.0)) -> BoundMonitor:
    """Build the monitor from ``E(t_i)``; ``P`` holds ascending polynomial coefficients."""
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("bound_monitor needs a nonempty series")
    M0 = float(series[0])
    P = tuple(float(c) for c in P)
    denom = C * Polynomial(P)(2.0 * M0)
    with np.errstate(over="ignore"):
        T_star = float(M0 / denom) if denom > 0 else float("inf")
    bad = (times <= T_star) & ~(series <= 2.0 * M0)
    first = float(times[np.argmax(bad)]) if bad.any() else None
    return BoundMonitor(M0, float(C), P, T_star, times, series, first)


def quadratic_fixed_point(t, M0: float = 1.0, C: float = 1.0):
    """Smallest root of ``f = M0 + C t f^2`` (``f(0) = M0``), for ``t <= 1/(4 C M0)``."""
    t = np.asarray(t, dtype=float)
    # rationalized form of (1 - sqrt(1 - 4 C M0 t)) / (2 C t)
    return 2.0 * M0 / (1.0 + np.sqrt(np.maximum(1.0 - 4.0 * C * M0 * t, 0.0)))
