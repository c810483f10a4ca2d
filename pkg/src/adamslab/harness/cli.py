"""Command-line entry point: `adamslab verify|constants|report`.

Exit codes: 0 when every case passes, 1 on a verification failure, 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import SUITES, ConfigError, load_config
from .report import emit, parse, to_json
from .suites import constants_json, constants_table, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 already; keep the message terse
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="adamslab", description="Numerical verification of sharp exponential-integral inequalities.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", nargs="?", help=f"one of {', '.join(SUITES)}")
    v.add_argument("--suite", dest="suite_flag", help="suite name (alternative to the positional)")
    v.add_argument("--config", help="key = value configuration file")
    v.add_argument("--grid-points", type=int)
    v.add_argument("--tolerance", type=float)
    v.add_argument("--tau-ladder", help="comma-separated tau values")
    v.add_argument("--epsilon-ladder", help="comma-separated epsilon values")
    v.add_argument("--seed", type=int)
    v.add_argument("--samples", type=int)
    v.add_argument("--workers", type=int)
    v.add_argument("--json", dest="json_path", help="write the JSON report here")
    v.add_argument("--csv", dest="csv_path", help="write the CSV table here")
    v.add_argument("--no-timing", action="store_true", help="omit wall time for bit-stable JSON")
    v.add_argument("--quiet", action="store_true")

    c = sub.add_parser("constants", help="print the sharp constants")
    c.add_argument("--json", action="store_true")

    r = sub.add_parser("report", help="summarize a saved JSON report")
    r.add_argument("path")
    return p


def _verify(args) -> int:
    suite = args.suite or args.suite_flag
    if suite is None:
        print("adamslab verify: a suite name is required", file=sys.stderr)
        return EXIT_USAGE
    overrides = {
        "suite": suite,
        "grid_points": args.grid_points,
        "tolerance": args.tolerance,
        "tau_ladder": args.tau_ladder,
        "epsilon_ladder": args.epsilon_ladder,
        "seed": args.seed,
        "samples": args.samples,
        "workers": args.workers,
    }
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"adamslab verify: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep = run_suite(cfg.suite, cfg)
    timing = not args.no_timing
    try:
        if args.json_path:
            emit(rep, "json", args.json_path, include_timing=timing)
        if args.csv_path:
            emit(rep, "csv", args.csv_path)
    except OSError as exc:
        print(f"adamslab verify: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.quiet:
        _summary(rep, timing)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _summary(rep, timing: bool = True) -> None:
    fails = rep.failures()
    line = f"{rep.suite}: {len(rep.cases) - len(fails)}/{len(rep.cases)} cases passed"
    if timing:
        line += f" in {rep.wall_time:.1f}s"
    print(line)
    for c in fails:
        print(f"  FAIL {c.name}: {c.relation} measured={json.dumps(c.measured, sort_keys=True)[:200]}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _verify(args)
    if args.command == "constants":
        if args.json:
            print(json.dumps(constants_json(), sort_keys=True, indent=2))
        else:
            table = constants_table()
            width = max(len(k) for k in table)
            for k, v in table.items():
                print(f"{k:<{width}}  {v:.17g}")
        return EXIT_OK
    try:
        rep = parse(args.path)
    except (OSError, ValueError, KeyError) as exc:
        print(f"adamslab report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _summary(rep)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
