"""Run both reference configurations and write their plots.

Outputs go to out/reference_1d and out/reference_2d (run.csv, summary.json,
final_state.npz and four SVGs each).
"""

import argparse
import json
from pathlib import Path

from vaceuler.cli import main

ROOT = Path(__file__).resolve().parents[1]


def run(name, out_root):
    out = out_root / name
    code = main(["simulate", "--config", str(ROOT / "configs" / f"{name}.yaml"), "--out", str(out)])
    main(["plot", str(out / "run.csv"), "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())
    monitor = summary["bound_monitor_proxy"]
    print(f"{name}: exit {code}, {summary['termination']}, rows {summary['rows']}, "
          f"max physical-energy drift {summary['max_physical_energy_drift']:.2e}, "
          f"max E/E(0) {monitor['max_ratio_to_M0']:.3g}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "out"))
    args = ap.parse_args()
    for name in ("reference_1d", "reference_2d"):
        run(name, Path(args.out))
