"""Pencil -> (measure, model operator) -> pencil round trip on random pencils.

Usage: python3 scripts/inverse_round_trip.py [--count 20] [--size 10] [--seed 0]
"""
import argparse
import time

import numpy as np

from jtpencil.inverse import check_admissibility, model_representation, reconstruct_pencil
from jtpencil.measure import Measure
from jtpencil.pencil import FiveDiagMatrix, JacobiMatrix, Pencil


def random_pencil(rng, n=24) -> Pencil:
    J3 = JacobiMatrix(rng.uniform(0.5, 2.0, n), rng.uniform(-1.0, 1.0, n + 1))
    J5 = FiveDiagMatrix(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), rng.uniform(0.5, 2.0, n))
    return Pencil(J3, J5, rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))


def band_error(got: Pencil, want: Pencil, n: int) -> float:
    al, be, ga = want.J5.bands(n + 1)
    parts = [got.J3.a[:n] - want.J3.a_band(n), got.J3.b[: n + 1] - want.J3.b_band(n + 1),
             got.J5.alpha5[: n + 1] - al, got.J5.beta5[:n] - be[:n],
             got.J5.gamma5[: n - 1] - ga[: n - 1], [got.alpha - want.alpha, got.beta - want.beta]]
    return max(float(np.abs(np.asarray(p, dtype=float)).max()) for p in parts)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--size", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("pencil,admissible,max_band_error,seconds")
    for k in range(args.count):
        theta = random_pencil(rng)
        t = time.perf_counter()
        op = model_representation(theta, Measure.jacobi_generated(theta.J3, 40), args.size + 2)
        ok = check_admissibility(op, args.size).passed
        err = band_error(reconstruct_pencil(op, args.size), theta, args.size)
        print(f"{k},{ok},{err!r},{time.perf_counter() - t:.3f}")


if __name__ == "__main__":
    main()
