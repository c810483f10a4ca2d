"""Write the probe ladders (log functional per parameter) to CSV files, one per probe."""

import argparse
import math
from pathlib import Path

from adamslab import extremal
from adamslab.harness.suites import sharpness_plan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/sharpness", help="output directory")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, fam, theta, ladder in sharpness_plan():
        if fam.kind == "kernel_power_infinity":
            fam = extremal.ExtremalFamily(fam.kind, fam.space, fam.kernel, log_r_max=math.log(1e25))
        rep = extremal.sharpness_probe(fam, fam.kernel, fam.params(p=2.0), theta[0], theta[1], ladder)
        (out / f"{name}.csv").write_text(extremal.ladder_csv(rep))
        band = rep.cases[-1].measured["band"]
        print(f"{name:18s} theta={theta} {rep.grid['classification']:12s} band={band:.3g}")


if __name__ == "__main__":
    main()
