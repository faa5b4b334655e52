"""Command line interface.

Subcommands mirror the study types: coefficient, trace-sweep, ee-sweep,
entropy-density, oracle, and validate. Outputs are CSV tables, JSON
records, a plain-text fit summary on stdout, and rendered PNG figures next
to the tables.
"""

import argparse
import json
import random
import sys

import numpy as np

from . import harness


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="whlab",
        description=(
            "Numerical lab for truncated convolution operators: trace "
            "asymptotics and free-fermion entropies."
        ),
    )
    p.add_argument("--config", help="scenario JSON file (defaults built in)")
    p.add_argument("--out", help="output directory for tables and figures")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--tol", type=float, help="override scenario tolerance")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized property checks")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("coefficient", "trace-sweep", "ee-sweep", "entropy-density",
                 "oracle"):
        sub.add_parser(name, help=f"run the {name} study")
    v = sub.add_parser("validate", help="run the acceptance suite")
    v.add_argument("suite", nargs="?", default="full", choices=("fast", "full"))
    return p


_RUNNERS = {
    "coefficient": harness.run_coefficient,
    "trace-sweep": harness.run_trace_sweep,
    "ee-sweep": harness.run_ee_sweep,
    "entropy-density": harness.run_entropy_density,
    "oracle": harness.run_oracle,
}


def _summarize(rec) -> str:
    lines = [f"{rec.kind}: {len(rec.rows)} points in {rec.wall_seconds:.1f}s"]
    for key, val in rec.fits.items():
        lines.append(f"  fit {key} = {val:.6g}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    random.seed(args.seed)
    np.random.seed(args.seed)

    if args.command == "validate":
        return harness.validate(args.suite, out=args.out)

    if args.config:
        scn = harness.Scenario.from_file(args.config)
    else:
        scn = harness.Scenario()
    if args.tol is not None:
        scn = harness.Scenario.from_dict({**json.loads(scn.canonical_json()),
                                          "tol": args.tol})
    rec = _RUNNERS[args.command](scn, outdir=args.out, jobs=args.jobs)
    print(_summarize(rec))
    if args.out:
        print(f"tables, records and figures under {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
