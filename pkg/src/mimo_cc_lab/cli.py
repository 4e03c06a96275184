"""Command line entry point ``mimo-cc-lab``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cc_core import SystemParams, build_placement, build_schedule, verify_decodability
from .dof import dof_max, dof_quick, quick_metric_feasible
from .errors import MimoCCError
from .harness import ExperimentConfig, rate_curve


def _cmd_dof(args) -> int:
    sol = dof_max(args.L, args.G, args.t, args.omega)
    quick = dof_quick(args.L, args.G, args.t)
    if args.json:
        out = {
            "L": args.L,
            "G": args.G,
            "t": args.t,
            "omega_star": sol.omega_star,
            "beta_star": sol.beta_star,
            "dof": sol.dof,
            "dof_quick": quick,
            "dof_quick_feasible": quick_metric_feasible(args.L, args.G, args.t),
            "table": [{"omega": o, "beta_bound": b, "dof": d} for o, b, d in sol.table()],
        }
        print(json.dumps(out, indent=2))
        return 0
    print(f"L={args.L} G={args.G} t={args.t}")
    print(f"{'omega':>6} {'beta':>6} {'omega*beta':>11}")
    for o, b, d in sol.table():
        print(f"{o:>6} {b:>6} {d:>11}")
    print(f"optimum: omega={sol.omega_star} beta={sol.beta_star} DoF={sol.dof}")
    print(f"quick metric: {quick}")
    return 0


def _cmd_verify(args) -> int:
    L = args.L if args.L is not None else max(1, args.omega - args.t)
    params = SystemParams(K=args.K, L=L, G=1, t=args.t)
    schedule = build_schedule(params, args.omega)
    report = verify_decodability(schedule, build_placement(args.K, args.t))
    recovered = {k: len(v) for k, v in report.recovered.items()}
    print(
        f"K={args.K} t={args.t} omega={args.omega}: theta={schedule.theta}, "
        f"{len(schedule.transmissions)} transmissions, {schedule.n_codewords} codewords"
    )
    if report.passed:
        print(f"PASS: every user recovers {recovered.get(1, 0)} subpackets exactly once")
    else:
        print(f"FAIL: {report.failure}")
    if args.json:
        out = {
            "passed": report.passed,
            "failure": report.failure,
            "theta": schedule.theta,
            "n_transmissions": len(schedule.transmissions),
            "n_codewords": schedule.n_codewords,
            "recovered_per_user": {str(k): n for k, n in recovered.items()},
            "schedule": schedule.to_dict(),
        }
        Path(args.json).write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
    return 0 if report.passed else 1


def _cmd_rate_curve(args) -> int:
    config = ExperimentConfig.from_json(args.config, output=args.out)
    curve = rate_curve(config, workers=args.workers)
    curve.write_csv(args.out)
    failed = sum(pt.trials_failed for pt in curve.points)
    print(f"wrote {len(curve.points)} SNR points to {args.out} ({failed} failed trials)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimo-cc-lab", description="MIMO coded-caching delivery analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dof", help="DoF bound table and optimum over the number of served users")
    p.add_argument("--L", type=int, required=True, help="transmit spatial multiplexing gain")
    p.add_argument("--G", type=int, required=True, help="receive spatial multiplexing gain")
    p.add_argument("--t", type=int, required=True, help="coded caching gain")
    p.add_argument("--omega", type=int, help="restrict the search to this number of served users")
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p.set_defaults(func=_cmd_dof)

    p = sub.add_parser("verify-scheme", help="check decodability of the delivery schedule")
    p.add_argument("--K", type=int, required=True, help="number of users")
    p.add_argument("--t", type=int, required=True, help="coded caching gain")
    p.add_argument("--omega", type=int, required=True, help="users served per transmission")
    p.add_argument("--L", type=int, help="transmit gain used to validate omega (default: omega - t)")
    p.add_argument("--json", metavar="OUT", help="write the report and schedule as JSON to OUT")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("rate-curve", help="Monte Carlo symmetric-rate curve")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--workers", type=int, default=1, help="worker processes (output does not depend on it)")
    p.set_defaults(func=_cmd_rate_curve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MimoCCError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
