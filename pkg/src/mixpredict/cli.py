"""Command-line front end: run named scenarios, write one CSV per scenario
plus a plain-text manifest, exit nonzero iff any assertion failed.

Environment variables are never consulted; everything comes from flags.
"""
from __future__ import annotations

import argparse
import inspect
import sys
import time
from pathlib import Path

from .scenarios import SCENARIOS, write_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixpredict",
        description="sequence-prediction experiment scenarios; emits CSV reports",
    )
    parser.add_argument("--scenario", action="append", default=None,
                        metavar="NAME", help="run only this scenario (repeatable)")
    parser.add_argument("--out", default="results", metavar="DIR",
                        help="output directory (default: results)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the seed of stochastic scenarios")
    parser.add_argument("--max-n", type=int, default=None, dest="max_n",
                        help="override the maximum horizon")
    parser.add_argument("--grid", type=int, default=None,
                        help="override the grid size / denominator")
    parser.add_argument("--tol", type=float, default=None,
                        help="override the solver tolerance")
    parser.add_argument("--class-file", default=None, dest="class_file",
                        metavar="PATH", help="class-specification file")
    parser.add_argument("--list", action="store_true",
                        help="print scenario names and exit")
    return parser


def _scenario_kwargs(fn, args) -> dict:
    accepted = inspect.signature(fn).parameters
    overrides = {"seed": args.seed, "max_n": args.max_n, "grid": args.grid,
                 "tol": args.tol, "class_file": args.class_file}
    return {k: v for k, v in overrides.items() if v is not None and k in accepted}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.list:
        for name in SCENARIOS:
            print(name)
        return 0
    names = args.scenario or list(SCENARIOS)
    unknown = [n for n in names if n not in SCENARIOS]
    if unknown:
        print(f"unknown scenario(s): {', '.join(unknown)}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    failed = False
    for name in names:
        fn = SCENARIOS[name]
        start = time.perf_counter()
        try:
            result = fn(**_scenario_kwargs(fn, args))
            write_csv(result, out_dir / f"{name}.csv")
            status = "ok" if result.ok else "FAILED"
            if not result.ok:
                failed = True
                print(f"{name}: {result.message}", file=sys.stderr)
        except Exception as exc:
            status = "ERROR"
            failed = True
            print(f"{name}: {exc}", file=sys.stderr)
        elapsed = time.perf_counter() - start
        manifest.append((name, status, elapsed))
        print(f"{name:24s} {status:7s} {elapsed:8.2f}s")

    with open(out_dir / "manifest.txt", "w") as fh:
        fh.write(f"{'scenario':24s} {'status':7s} {'seconds':>10s}\n")
        for name, status, elapsed in manifest:
            fh.write(f"{name:24s} {status:7s} {elapsed:10.2f}\n")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
