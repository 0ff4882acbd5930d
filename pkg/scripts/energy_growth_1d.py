"""Higher-order energy on the 1D reference setup at several resolutions.

With rho0 = 1 - x and a fixed bottom wall, the interior acceleration at the wall
is nonzero while the wall holds the fluid at rest, so a kink leaves the wall
and E(t) grows with resolution for t > 0. Also prints E(0) against 20/3.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from vaceuler.config import load_config
from vaceuler.run import simulate

ROOT = Path(__file__).resolve().parents[1]


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--T", type=float, default=0.01)
    args = ap.parse_args()
    print(f"E(0) analytic: {20 / 3:.10f}")
    for n in args.sizes:
        cfg = load_config(ROOT / "configs" / "reference_1d.yaml")
        cfg.slab = replace(cfg.slab, n_vertical=n)
        cfg.time = replace(cfg.time, T_final=args.T)
        cfg.diagnostics = replace(cfg.diagnostics, cadence=args.T / 4)
        traj = simulate(cfg)
        E = traj.column("E_total")
        series = "  ".join(f"{x:.3e}" for x in E)
        print(f"n = {n:4d}: E(0) = {E[0]:.10f}; E(t_i) = {series}")
