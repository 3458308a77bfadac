"""Smallest beam eigenvalue under grid refinement for both clamping conventions.

Usage: python3 scripts/beam_convergence.py [--n 40] [--levels 4] [--c 0.0]
"""
import argparse
import math

from jtpencil.beamgrid import CLAMPS, BeamProblem, refine
from jtpencil.io import table_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--c", type=float, default=0.0)
    args = ap.parse_args()
    rows = []
    for clamp in CLAMPS:
        R = refine(lambda n: BeamProblem.from_functions(n, c=args.c), args.n, clamp, args.levels)
        for k, (n, lam) in enumerate(zip(R.sizes, R.lams)):
            ratio = R.error_ratios[k - 2] if k >= 2 else ""
            rows.append([clamp, str(n), lam, ratio])
        print(f"# {clamp}: observed order {R.order:.3f}")
    if args.c == 0.0:
        print(f"# reference 4 pi^2 = {4 * math.pi ** 2!r}")
    print(table_csv(rows, ["clamp", "N", "lambda", "diff_ratio"]), end="")


if __name__ == "__main__":
    main()
