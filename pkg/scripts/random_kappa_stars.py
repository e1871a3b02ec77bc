"""Random stars: negative count from the inertia of T against the finite-element
count, with both upper bounds, one line per star."""

import argparse
import time

import numpy as np

from qgraph import negspec, oracle
from qgraph.samples import random_star


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--potentials", choices=("zero", "psd", "mixed"), default="mixed")
    ap.add_argument("--h", type=float, default=1e-3)
    ap.add_argument("--L", type=float, default=50.0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    params = oracle.DiscretizationParams(h=args.h, L_trunc=args.L)
    mismatches = 0
    print(" i  m p1 p2  T  FEM  Barg  asum  min|eig T|   sec")
    for i in range(args.count):
        g = random_star(rng, potentials=args.potentials)
        t0 = time.perf_counter()
        k, zero, T = negspec.kappa_weyl(g)
        ko = oracle.kappa_oracle(g, params)
        kir = negspec.kappa_weyl(g.kirchhoff())[0]
        gap = np.abs(np.linalg.eigvalsh(T)).min()
        mismatches += k != ko
        print(f"{i:2d}  {g.m} {g.p1:2d} {g.p2:2d} {k:2d} {ko:4d} {negspec.bargmann_bound(g):5d} "
              f"{negspec.alpha_sum_bound(g, kir):5d}  {gap:10.3e} {time.perf_counter() - t0:5.1f}"
              + ("  <- differ" if k != ko else ""))
    print(f"{mismatches} mismatches in {args.count} stars")


if __name__ == "__main__":
    main()
