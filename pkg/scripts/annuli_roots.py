"""Annulus decompositions for the far-field modified kernel, where the root finder places r_j."""

import argparse

import numpy as np

from adamslab import kernel, potential


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--support", type=float, default=1e3)
    args = ap.parse_args()
    k = kernel.modified_riesz(2, 1)
    for tau in np.geomspace(1e-3, 0.5, 12):
        d = potential.build_annuli(k, float(tau), args.support)
        print(f"tau={tau:.3e} N={d.N:2d} roots={int(d.rooted.sum())} residual={d.root_residual:.1e} "
              f"Q1={d.Q1:.3g} Q2={d.Q2:.3g} invariants={'ok' if d.check().passed else 'FAIL'}")


if __name__ == "__main__":
    main()
