"""Vertical refinement study of the vorticity diagnostics on the 2D reference setup.

Prints the curl-transport and Cauchy-invariant residuals at T_final for each
n_vertical, with the observed order between neighbouring grids.
"""

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from vaceuler.config import load_config
from vaceuler.run import simulate

ROOT = Path(__file__).resolve().parents[1]


def study(levels, T, dt):
    base = load_config(ROOT / "configs" / "reference_2d.yaml")
    base.time = replace(base.time, T_final=T, dt=dt)
    base.diagnostics = replace(base.diagnostics, cadence=T)
    prev = None
    print(f"{'n_v':>5} {'curl transport':>15} {'order':>7} {'Cauchy':>10} {'order':>7}")
    for n in levels:
        cfg = replace(base, slab=replace(base.slab, n_vertical=n))
        traj = simulate(cfg)
        if not traj.healthy:
            print(f"{n:5d} stopped: {traj.reason} ({traj.message})")
            continue
        ct = traj.column("curl_transport")[-1]
        ci = traj.column("cauchy_residual")[-1]
        orders = ["", ""]
        if prev is not None:
            r = np.log((n - 1) / (prev[0] - 1))
            orders = [f"{np.log(prev[1] / ct) / r:7.2f}", f"{np.log(prev[2] / ci) / r:7.2f}"]
        print(f"{n:5d} {ct:15.3e} {orders[0]:>7} {ci:10.3e} {orders[1]:>7}")
        prev = (n, ct, ci)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, nargs="+", default=[17, 33, 65, 129])
    ap.add_argument("--T", type=float, default=0.05)
    ap.add_argument("--dt", type=float, default=5e-4, help="fixed step; 129+ nodes need <= 5e-4")
    args = ap.parse_args()
    study(args.levels, args.T, args.dt)
