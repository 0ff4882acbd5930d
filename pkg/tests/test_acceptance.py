"""Acceptance criteria, one test each, printing a PASS/FAIL line per criterion.

Runnable directly: ``python3 tests/test_acceptance.py``.
"""

import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from vaceuler.checks import SPATIAL_ORDER, run_estimates, run_identities
from vaceuler.cli import main
from vaceuler.config import load_config
from vaceuler.dynamics import (
    InitialData,
    State,
    acceleration,
    acceleration_conservative,
    acceleration_elliptic,
    density_profile,
    mass_residual,
    step,
)
from vaceuler.energy import bound_monitor, quadratic_fixed_point
from vaceuler.grid import Slab
from vaceuler.run import build_problem, simulate

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
TP = 2 * np.pi


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def run_1d():
    return _timed(simulate, load_config(CONFIGS / "reference_1d.yaml"))


@pytest.fixture(scope="module")
def run_2d():
    return _timed(simulate, load_config(CONFIGS / "reference_2d.yaml"))


def test_criterion_1_identities(acceptance_line):
    report, elapsed = _timed(run_identities, 32)
    bad = [f"{m}.{k}" for m, e in report["maps"].items() for k, c in e["checks"].items() if not c["ok"]]
    piola = [e["checks"]["piola"]["order"] for e in report["maps"].values()]
    ok = report["passed"] and elapsed < 30.0
    acceptance_line(
        1, ok,
        f"10 maps, piola orders {min(piola):.2f}..{max(piola):.2f} (declared {SPATIAL_ORDER}), "
        f"failing {bad or 'none'}, {elapsed:.1f} s",
    )
    assert ok


def _smooth_states():
    s2 = Slab(2, 32, 64)
    x = s2.coords
    eta2 = x + 0.02 * np.stack([np.sin(TP * x[0]) * x[1] ** 2, np.cos(TP * x[0]) * np.sin(np.pi * x[1])])
    yield "2d", s2, eta2
    s3 = Slab(3, 16, 64)
    x = s3.coords
    eta3 = x + 0.02 * np.stack([
        np.sin(TP * x[1]) * x[2] ** 2,
        np.cos(TP * x[0]) * np.exp(x[2]) / 3,
        np.sin(TP * (x[0] + x[1])) * np.sin(np.pi * x[2]),
    ])
    yield "3d", s3, eta3


def test_criterion_2_three_forms(acceptance_line):
    worst = {}
    for name, slab, eta in _smooth_states():
        data = InitialData(slab, density_profile(slab), np.zeros_like(slab.coords))
        st = State(slab, 0.0, eta, np.zeros_like(eta))
        band = (slab.x_vertical >= 0.1) & (slab.x_vertical <= 0.9)
        vor = acceleration(st, data)
        scale = np.abs(vor[..., band]).max()
        cons = acceleration_conservative(st, data)[..., band[:-1]]
        ell = acceleration_elliptic(st, data)[..., band]
        worst[name] = (
            np.abs(cons - vor[..., :-1][..., band[:-1]]).max() / scale,
            np.abs(ell - vor[..., band]).max() / scale,
        )
    ok = all(max(v) <= 1e-6 for v in worst.values())
    detail = ", ".join(f"{k}: cons {a:.1e}, ell {b:.1e}" for k, (a, b) in worst.items())
    acceptance_line(2, ok, f"interior x3 in [0.1, 0.9], n_vertical 64 relative to vorticity form; {detail}")
    assert ok


def test_criterion_3_energy_conservation(acceptance_line, run_1d):
    traj, elapsed = run_1d
    drift = float(np.max(np.abs(traj.column("physical_energy_drift"))))
    ok = traj.healthy and drift <= 1e-6 and elapsed < 60.0
    acceptance_line(3, ok, f"1D reference run: max drift {drift:.2e}, {elapsed:.1f} s")
    assert ok


def _mass_order(data, form, dt):
    s = State.initial(data)
    for _ in range(3):
        s = step(s, data, dt, form)
    r = [mass_residual(step(s, data, -d, form), s, step(s, data, d, form), data) for d in (2 * dt, dt)]
    return r, float(np.log2(r[0] / r[1]))


def test_criterion_4_mass_residual(acceptance_line):
    c1 = load_config(CONFIGS / "reference_1d.yaml")
    c2 = load_config(CONFIGS / "reference_2d.yaml")
    r1, p1 = _mass_order(build_problem(c1), c1.dynamics.form, 1e-3)
    r2, p2 = _mass_order(build_problem(c2), c2.dynamics.form, 1e-3)
    ok = p1 >= 1.8 and p2 >= 1.8
    acceptance_line(4, ok, f"dt-halving order 1D {p1:.2f} ({r1[1]:.1e}), 2D {p2:.2f} ({r2[1]:.1e})")
    assert ok


def test_criterion_5_vorticity(acceptance_line, run_2d):
    fine, _ = run_2d
    cfg = load_config(CONFIGS / "reference_2d.yaml")
    cfg.slab = replace(cfg.slab, n_vertical=cfg.slab.n_vertical // 2)
    coarse = simulate(cfg)
    h_ratio = (fine.data.slab.n_vertical - 1) / (coarse.data.slab.n_vertical - 1)
    e_c = coarse.column("curl_transport")[-1]
    e_f = fine.column("curl_transport")[-1]
    order = float(np.log(e_c / e_f) / np.log(h_ratio))
    cauchy = float(np.max(fine.column("cauchy_residual")))
    ok = fine.healthy and coarse.healthy and order >= SPATIAL_ORDER - 1 and cauchy <= 1e-4
    acceptance_line(
        5, ok,
        f"curl transport {e_c:.1e} -> {e_f:.1e}, order {order:.2f} (need >= {SPATIAL_ORDER - 1}); "
        f"Cauchy residual {cauchy:.1e}",
    )
    assert ok


def _bound(traj):
    E = traj.column("E_total")
    J_ok = bool(np.all(traj.column("J_ok")))
    ratio = float(np.max(E) / E[0])
    return traj.healthy and J_ok and ratio <= 2.0, ratio, J_ok, traj.column("t")[-1]


def test_criterion_6_bound_1d(acceptance_line, run_1d):
    ok, ratio, J_ok, t_end = _bound(run_1d[0])
    acceptance_line("6 (1D)", ok, f"max E/E(0) = {ratio:.3g} up to t = {t_end:.3g}, J in [1/2, 3/2]: {J_ok}")
    assert ok


def test_criterion_6_bound_2d(acceptance_line, run_2d):
    ok, ratio, J_ok, t_end = _bound(run_2d[0])
    acceptance_line("6 (2D)", ok, f"max E/E(0) = {ratio:.3g} up to t = {t_end:.3g}, J in [1/2, 3/2]: {J_ok}")
    assert ok


def test_criterion_7_inequality_batteries(acceptance_line):
    report = run_estimates(seed=0, n_fields=50)
    parts = ", ".join(
        f"{k} C={v['coarse']:.3g} ({100 * v['relative_change']:.2g}%)" for k, v in report["constants"].items()
    )
    acceptance_line(7, report["passed"], f"50 fields, seed 0: {parts}")
    assert report["passed"]


def test_criterion_8_bound_monitor(acceptance_line):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        M0, C = rng.uniform(0.1, 10.0, 2)
        P = rng.uniform(0.0, 2.0, rng.integers(2, 5))
        m = bound_monitor([0.0], [M0], C, P)
        worst = max(worst, abs(M0 + C * m.T_star * Polynomial(P)(2 * M0) - 2 * M0) / (2 * M0))
    m = bound_monitor([0.0], [1.0], 1.0, (0, 0, 1))
    f_star = float(quadratic_fixed_point(m.T_star))
    ok = worst <= 1e-14 and abs(f_star - 2.0) <= 1e-10
    acceptance_line(8, ok, f"20 triples: worst relative identity error {worst:.1e}; f(T*) = {f_star!r}")
    assert ok


def test_criterion_9_determinism(acceptance_line, tmp_path):
    blobs = {}
    for name in ("reference_1d", "reference_2d"):
        runs = []
        for k in range(2):
            out = tmp_path / f"{name}_{k}"
            assert main(["simulate", "--config", str(CONFIGS / f"{name}.yaml"), "--out", str(out)]) == 0
            runs.append((out / "run.csv").read_bytes())
        blobs[name] = runs[0] == runs[1]
    ok = all(blobs.values())
    acceptance_line(9, ok, "byte-identical run.csv: " + ", ".join(f"{k} {v}" for k, v in blobs.items()))
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
