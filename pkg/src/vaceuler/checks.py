"""Check batteries behind ``vaceuler check``: identities, norms and estimates.

Each battery returns a JSON-serializable dict with a top-level ``passed`` flag.
"""

from __future__ import annotations

import time

import numpy as np

from .grid import Slab
from .kinematics import (
    build_bundle,
    check_horizontal_identities,
    check_time_identities,
    piola_residual,
)
from .norms import (
    boundary_norm,
    dual_interior_norm,
    embedding_check,
    hodge_check,
    interior_norm,
    random_field,
    trace_check,
)

__all__ = [
    "IDENTITY_MAPS",
    "ROUNDING_FLOOR",
    "measured_order",
    "run_identities",
    "run_norms",
    "run_estimates",
    "SUITES",
]

# Relative residuals below this are treated as converged to rounding.
ROUNDING_FLOOR = 1e-11
SPATIAL_ORDER = 6
TIME_ORDER = 1  # forward difference in t
ORDER_TOL = 0.5

TP = 2 * np.pi


def _map(f1, f2, f3):
    def eta(x):
        return x + 0.05 * np.stack([f1(*x), f2(*x), f3(*x)])

    return eta


# Displacements couple the vertical coordinate nonlinearly into several
# components so that cofactor entries are products of x_3-dependent factors.
IDENTITY_MAPS = {
    "exp_shear": (
        _map(lambda a, b, z: np.sin(TP * b) * np.exp(z), lambda a, b, z: np.cos(TP * a) * z**2,
             lambda a, b, z: np.sin(TP * a) * np.sin(np.pi * z)),
        lambda a, b, z: np.stack([np.cos(TP * b) * z, np.sin(TP * a) * np.exp(-z), z * (1 - z)]),
    ),
    "cubic_twist": (
        _map(lambda a, b, z: z**3 * np.cos(TP * b), lambda a, b, z: np.sin(TP * (a + b)) * np.cosh(z),
             lambda a, b, z: z * np.sin(TP * a)),
        lambda a, b, z: np.stack([np.sin(TP * a) * z**2, np.cos(TP * b) * z, np.sin(np.pi * z) * np.cos(TP * a)]),
    ),
    "bump": (
        _map(lambda a, b, z: np.exp(-((z - 0.5) ** 2)) * np.sin(TP * a), lambda a, b, z: np.cos(TP * b) * np.sin(z),
             lambda a, b, z: np.cos(TP * (a - b)) * z**2),
        lambda a, b, z: np.stack([np.exp(z) * np.sin(TP * b), np.cos(TP * a), z * np.exp(-z)]),
    ),
    "log_profile": (
        _map(lambda a, b, z: np.log(1 + z) * np.cos(TP * b), lambda a, b, z: np.log(2 + z) * np.sin(TP * a),
             lambda a, b, z: np.sin(TP * b) * np.sin(2 * z)),
        lambda a, b, z: np.stack([np.log(1 + z), np.sin(TP * (a + b)) * z, np.sin(np.pi * z)]),
    ),
    "rational": (
        _map(lambda a, b, z: np.sin(TP * b) / (2 + z), lambda a, b, z: np.cos(TP * a) / (1.5 + z),
             lambda a, b, z: z**2 * np.cos(TP * b) * np.sin(TP * a)),
        lambda a, b, z: np.stack([1 / (2 + z), np.sin(TP * b) * z, np.cos(TP * a) * z**2]),
    ),
    "double_mode": (
        _map(lambda a, b, z: np.sin(2 * TP * a) * np.cos(1.5 * z), lambda a, b, z: np.sin(TP * b) * np.exp(z / 2),
             lambda a, b, z: np.cos(TP * a) * np.sin(TP * b) * np.sin(np.pi * z / 2)),
        lambda a, b, z: np.stack([np.cos(2 * TP * b) * z, np.exp(z / 2), np.sin(TP * a) * z**3]),
    ),
    "sqrt_profile": (
        _map(lambda a, b, z: np.sqrt(1 + z) * np.sin(TP * b), lambda a, b, z: np.sqrt(2 - z) * np.cos(TP * a),
             lambda a, b, z: np.sin(TP * (a + b)) * z * (1 - z / 2)),
        lambda a, b, z: np.stack([np.sqrt(1 + z), np.cos(TP * a) * np.sin(z), np.sin(TP * b) * z]),
    ),
    "tanh_layer": (
        _map(lambda a, b, z: np.tanh(z) * np.cos(TP * a), lambda a, b, z: np.tanh(1 - z) * np.sin(TP * b),
             lambda a, b, z: np.cos(TP * a) * np.exp(-z)),
        lambda a, b, z: np.stack([np.tanh(z), np.tanh(z) * np.cos(TP * b), np.sin(np.pi * z)]),
    ),
    "arctan": (
        _map(lambda a, b, z: np.arctan(z) * np.sin(TP * (a - b)), lambda a, b, z: np.cos(TP * b) * np.sin(1.2 * z),
             lambda a, b, z: np.sin(TP * a) * np.cos(z)),
        lambda a, b, z: np.stack([np.arctan(z), np.cos(TP * a) * z, np.sin(TP * b) * np.sin(z)]),
    ),
    "mixed": (
        _map(lambda a, b, z: np.sin(TP * a) * np.cos(TP * b) * np.exp(z / 3),
             lambda a, b, z: np.sin(TP * b) * z**2 * np.exp(-z), lambda a, b, z: np.cos(TP * (a + b)) * np.sin(z)),
        lambda a, b, z: np.stack([np.sin(TP * a) * np.cos(z), np.cos(TP * (a - b)) * z, np.exp(-z) * z]),
    ),
}


def measured_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """``log(coarse / fine) / log(ratio)``; infinite when ``fine`` is zero."""
    if fine == 0.0:
        return float("inf")
    if coarse == 0.0:
        return float("nan")
    return float(np.log(coarse / fine) / np.log(ratio))


def _order_ok(coarse_rel: float, fine_rel: float, order: float, declared: int) -> bool:
    if fine_rel <= ROUNDING_FLOOR:
        return True
    return abs(order - declared) <= ORDER_TOL


def run_identities(n: int = 32, delta: float = 1e-4) -> dict:
    """Kinematic identities on the 3D map battery.

    Spatial identities are evaluated on ``n^3`` and on ``n^2 x 2n`` (vertical
    refinement); the time identities at ``delta`` and ``delta / 2``.
    """
    t0 = time.perf_counter()
    grids = [Slab(3, n, n), Slab(3, n, 2 * n)]
    h_ratio = grids[0].h_vertical / grids[1].h_vertical
    report = {"maps": {}, "n": n, "delta": delta}
    all_ok = True
    for name, (eta_fn, v_fn) in IDENTITY_MAPS.items():
        entry = {}
        rel = []
        for slab in grids:
            eta = eta_fn(slab.coords)
            b = build_bundle(slab, eta)
            r = {"piola": piola_residual(b) / max(float(np.abs(slab.d_vertical(b.a)).max()), 1.0)}
            r.update(check_horizontal_identities(slab, eta).relative())
            rel.append(r)
        for key in rel[0]:
            p = measured_order(rel[0][key], rel[1][key], h_ratio)
            ok = _order_ok(rel[0][key], rel[1][key], p, SPATIAL_ORDER)
            entry[key] = {"coarse": rel[0][key], "fine": rel[1][key], "order": p, "ok": ok}
        slab = grids[0]
        eta = eta_fn(slab.coords)
        v = v_fn(*slab.coords)
        trel = [check_time_identities(slab, eta, v, eta + d * v, d).relative() for d in (delta, delta / 2)]
        for key in trel[0]:
            p = measured_order(trel[0][key], trel[1][key])
            ok = _order_ok(trel[0][key], trel[1][key], p, TIME_ORDER)
            entry[key] = {"coarse": trel[0][key], "fine": trel[1][key], "order": p, "ok": ok}
        entry_ok = all(e["ok"] for e in entry.values())
        all_ok &= entry_ok
        report["maps"][name] = {"ok": entry_ok, "checks": entry}
    report["runtime_s"] = time.perf_counter() - t0
    report["passed"] = bool(all_ok)
    return report


def run_norms(seed: int = 0, n_fields: int = 10) -> dict:
    """Structural properties of the norms on random smooth fields."""
    rng = np.random.default_rng(seed)
    slab = Slab(2, 16, 33)
    checks = {"monotone": True, "boundary_l2": True, "duality": True, "dual_contraction": True}
    worst = {k: 0.0 for k in checks}
    for _ in range(n_fields):
        f = random_field(slab, rng)
        norms = [interior_norm(slab, f, k) for k in range(5)]
        gap = max(norms[k] - norms[k + 1] for k in range(4))
        worst["monotone"] = max(worst["monotone"], gap)
        checks["monotone"] &= gap <= 1e-12 * norms[-1]
        tr = slab.top(f)
        l2_gamma = np.sqrt(slab.integrate_boundary(tr**2))
        err = abs(boundary_norm(slab, tr, 0.0) - l2_gamma) / max(l2_gamma, 1e-300)
        worst["boundary_l2"] = max(worst["boundary_l2"], err)
        checks["boundary_l2"] &= err <= 1e-12
        s = rng.uniform(0.1, 2.0)
        lhs = boundary_norm(slab, tr, s) * boundary_norm(slab, tr, -s)
        dual_gap = (boundary_norm(slab, tr, 0.0) ** 2 - lhs) / lhs
        worst["duality"] = max(worst["duality"], dual_gap)
        checks["duality"] &= dual_gap <= 1e-12
        ratio = dual_interior_norm(slab, f) / slab.l2(f)
        worst["dual_contraction"] = max(worst["dual_contraction"], ratio)
        checks["dual_contraction"] &= ratio <= 1.0 + 1e-8
    return {
        "seed": seed,
        "n_fields": n_fields,
        "checks": {k: {"ok": bool(checks[k]), "worst": float(worst[k])} for k in checks},
        "passed": bool(all(checks.values())),
    }


def _battery(slab: Slab, seed: int, n_fields: int) -> dict:
    """Ratios of every inequality for each field of the seeded battery."""
    rng = np.random.default_rng(seed)
    out = {"embed_p1": [], "embed_p2": [], "trace": [], "hodge_s1": [], "hodge_s2": []}
    for _ in range(n_fields):
        F = random_field(slab, rng, components=3)
        out["embed_p1"].append(embedding_check(slab, F[0], 1).ratio)
        out["embed_p2"].append(embedding_check(slab, F[0], 2).ratio)
        out["trace"].append(trace_check(slab, F).max_ratio)
        h1, h2 = hodge_check(slab, F, 1), hodge_check(slab, F, 2)
        out["hodge_s1"].append(max(h1.ratio_normal, h1.ratio_tangential))
        out["hodge_s2"].append(max(h2.ratio_normal, h2.ratio_tangential))
    return {k: np.array(v) for k, v in out.items()}


def run_estimates(seed: int = 0, n_fields: int = 50, n: int = 16, stability: float = 0.05) -> dict:
    """Empirical constants of the embedding, trace and Hodge inequalities.

    The constant is the max ratio over the battery on an ``n^2 x 2n`` slab.
    On the once-refined slab every ratio must stay below that constant (with
    the ``stability`` margin) and the refined constant must agree within
    ``stability``.
    """
    coarse = _battery(Slab(3, n, 2 * n), seed, n_fields)
    fine = _battery(Slab(3, 2 * n, 4 * n), seed, n_fields)
    result = {"seed": seed, "n_fields": n_fields, "constants": {}}
    ok_all = True
    for key in coarse:
        C0, C1 = float(coarse[key].max()), float(fine[key].max())
        change = abs(C1 - C0) / C0
        holds = bool(np.all(fine[key] <= C0 * (1 + stability)))
        ok = holds and change < stability and np.all(np.isfinite(fine[key]))
        ok_all &= bool(ok)
        result["constants"][key] = {
            "coarse": C0,
            "fine": C1,
            "relative_change": change,
            "all_fields_hold": holds,
            "ok": bool(ok),
        }
    result["passed"] = bool(ok_all)
    return result


SUITES = {"identities": run_identities, "norms": run_norms, "estimates": run_estimates}
