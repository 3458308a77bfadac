"""Node-doubling log of the contour evaluation of u(Ahat) e0 against Horner.

Usage: python3 scripts/riesz_convergence.py [--kappa 5 6 10] [--degree 10] [--seed 0]
"""
import argparse
import math

import numpy as np

from jtpencil.measure import Measure
from jtpencil.pencil import JacobiMatrix
from jtpencil.perturbation import ContourSpec, build_special, horner_ahat, riesz_apply_logged


def example(kappa: float):
    """a_k = sqrt2/kappa, b_k = 2/kappa with a = kappa/2, b = -2, d = 1/kappa."""
    J3 = JacobiMatrix.constant(math.sqrt(2) / kappa, 2 / kappa)
    m = Measure.chebyshev_u(2 / kappa, math.sqrt(2) / kappa)
    return build_special(J3, m, kappa / 2, -2.0, 1 / kappa, 20)[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", type=float, nargs="+", default=[5.0, 6.0, 10.0])
    ap.add_argument("--degree", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    u = np.random.default_rng(args.seed).normal(size=args.degree + 1)
    print("kappa,M,delta")
    for kappa in args.kappa:
        sp = example(kappa)
        res = riesz_apply_logged(sp, u, ContourSpec.default(sp, 16))
        for M, delta in res.log:
            print(f"{kappa!r},{M},{delta!r}")
        gap = np.abs(res.vector - horner_ahat(sp, u)).max()
        print(f"# kappa {kappa}: rho {ContourSpec.default(sp).rho:.4f}, "
              f"max |riesz - horner| {gap:.3e}, max |entry| {np.abs(res.vector).max():.3e}")


if __name__ == "__main__":
    main()
