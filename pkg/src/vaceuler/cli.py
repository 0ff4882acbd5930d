"""Command-line interface: ``vaceuler simulate | check | plot``.

Exit codes: 0 clean, 1 configuration or input error, 2 run stopped by a
health check (including CFL violations) or a failed check battery.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from contextlib import nullcontext
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import SCHEMA_VERSION, load_config
from .errors import VacEulerError
from .run import RECORD_COLUMNS, build_problem, simulate
from .dynamics import validate_initial_data

log = logging.getLogger("vaceuler")

CSV_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_HEALTH = 0, 1, 2

_REASON_ERRORS = {
    "cfl_violation": "CFLViolation",
    "singular_jacobian": "SingularJacobian",
    "J_bounds": "JacobianBounds",
    "non_finite": "NonFinite",
}


def _thread_limit():
    n = os.environ.get("VACEULER_THREADS")
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(n))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def write_csv(path: Path, records: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for row in records:
            writer.writerow([_fmt(row[c]) for c in RECORD_COLUMNS])


def read_csv(path: Path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError("empty CSV")
    header, body = rows[0], rows[1:]
    missing = {"t", "E_total", "physical_energy_drift", "J_min", "J_max", "eta_top_max"} - set(header)
    if missing:
        raise ValueError(f"CSV lacks columns {sorted(missing)}")
    if not body:
        raise ValueError("CSV has no data rows")
    cols = {h: [] for h in header}
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValueError(f"line {i}: expected {len(header)} fields, got {len(row)}")
        for h, x in zip(header, row):
            cols[h].append(float(x))
    return {h: np.array(v) for h, v in cols.items()}


def cmd_simulate(args) -> int:
    try:
        config = load_config(args.config)
        if args.cadence is not None:
            config.diagnostics = replace(config.diagnostics, cadence=args.cadence)
        if args.stack_depth is not None:
            config.dynamics = replace(config.dynamics, stack_depth=args.stack_depth)
        config.validate()
        data = build_problem(config)
        vacuum = validate_initial_data(data)
    except (VacEulerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or config.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    with _thread_limit():
        traj = simulate(config, data)
    write_csv(out / "run.csv", traj.records)
    final = traj.states[-1]
    np.savez(out / "final_state.npz", t=final.t, eta=final.eta, v=final.v)
    code = EXIT_OK if traj.healthy else EXIT_HEALTH
    summary = {
        "schema_version": SCHEMA_VERSION,
        "csv_version": CSV_VERSION,
        "package_version": __version__,
        "config": config.to_dict(),
        "termination": traj.reason,
        "error": _REASON_ERRORS.get(traj.reason),
        "message": traj.message,
        "exit_code": code,
        "dt": traj.dt,
        "rows": len(traj.records),
        "final_t": final.t,
        "vacuum_constant_C": vacuum.C,
        "computed_mask": traj.computed_mask,
        "bound_monitor_proxy": traj.monitor.report(),
        "max_physical_energy_drift": float(np.nanmax(np.abs(traj.column("physical_energy_drift")))),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if not traj.healthy:
        print(f"run stopped: {traj.reason}: {traj.message}", file=sys.stderr)
    return code


def cmd_check(args) -> int:
    from .checks import SUITES

    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        print(_parser().format_usage(), file=sys.stderr)
        return EXIT_CONFIG
    fn = SUITES[args.suite]
    with _thread_limit():
        report = fn() if args.suite == "identities" else fn(seed=args.seed)
    report["suite"] = args.suite
    text = json.dumps(report, indent=2, sort_keys=True, default=float) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_HEALTH


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    try:
        cols = read_csv(Path(args.record))
    except (OSError, ValueError) as exc:
        print(f"error: cannot read run record {args.record}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or Path(args.record).parent)
    out.mkdir(parents=True, exist_ok=True)
    t, E = cols["t"], cols["E_total"]
    M0 = E[0]
    over = E > 2 * M0

    fig, ax = plt.subplots()
    ax.plot(t, E, "o-", label="E(t)")
    ax.axhline(2 * M0, color="k", ls="--", label="2 E(0)")
    if over.any():
        ax.fill_between(t, 0, 1, where=over, color="red", alpha=0.2, transform=ax.get_xaxis_transform(),
                        label="E > 2 E(0)")
        print(f"warning: E(t) exceeds 2 E(0) from t = {t[np.argmax(over)]:.6g}", file=sys.stderr)
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("higher-order energy")
    ax.legend()
    fig.savefig(out / "energy.svg")
    plt.close(fig)

    fig, ax = plt.subplots()
    ax.plot(t, cols["physical_energy_drift"], "o-")
    ax.set_xlabel("t")
    ax.set_ylabel("relative physical-energy drift")
    fig.savefig(out / "energy_drift.svg")
    plt.close(fig)

    fig, ax = plt.subplots()
    ax.axhspan(0.5, 1.5, color="green", alpha=0.1, label="[1/2, 3/2]")
    ax.plot(t, cols["J_min"], "o-", label="min J")
    ax.plot(t, cols["J_max"], "s-", label="max J")
    ax.set_xlabel("t")
    ax.set_ylabel("J")
    ax.legend()
    fig.savefig(out / "jacobian.svg")
    plt.close(fig)

    fig, ax = plt.subplots()
    ax.plot(t, cols["eta_top_max"], "o-", label="max over boundary")
    if "eta_top_mean" in cols:
        ax.plot(t, cols["eta_top_mean"], "s-", label="boundary mean")
    ax.set_xlabel("t")
    ax.set_ylabel("vertical position of the vacuum boundary")
    ax.legend()
    fig.savefig(out / "boundary.svg")
    plt.close(fig)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1, keeping 2 for health terminations."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vaceuler", description="Lagrangian gamma = 2 Euler with a physical vacuum boundary")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a configured simulation")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (default: output.dir from the config)")
    s.add_argument("--cadence", type=float, help="diagnostic cadence override")
    s.add_argument("--stack-depth", type=int, help="time-derivative stack depth K override (1..8)")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="run a check battery: identities, norms or estimates")
    c.add_argument("suite")
    c.add_argument("--seed", type=int, default=0, help="seed for random battery fields")
    c.add_argument("--out", help="also write the JSON report here")
    c.set_defaults(func=cmd_check)

    q = sub.add_parser("plot", help="SVG plots from a run.csv record")
    q.add_argument("record")
    q.add_argument("--out", help="output directory (default: next to the record)")
    q.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
