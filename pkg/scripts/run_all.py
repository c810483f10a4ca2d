"""Run every verification suite and write JSON and CSV reports."""

import argparse
import sys
from pathlib import Path

from adamslab.harness.config import SUITES, HarnessConfig
from adamslab.harness.report import emit
from adamslab.harness.suites import run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/reports")
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    for name in SUITES:
        if name == "all":
            continue
        rep = run_suite(name, HarnessConfig(suite=name, samples=args.samples, seed=args.seed))
        emit(rep, "json", out / f"{name}.json", include_timing=False)
        emit(rep, "csv", out / f"{name}.csv")
        print(f"{name:10s} {len(rep.cases) - len(rep.failures())}/{len(rep.cases)} passed in {rep.wall_time:.1f}s")
        ok &= rep.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
