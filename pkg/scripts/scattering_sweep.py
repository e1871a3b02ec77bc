"""Scattering matrix of a random bump star over a lambda grid: unitarity
defect, |S_jk| and the transmission probabilities into each lead."""

import argparse

import numpy as np

from qgraph import build_star, scattering
from qgraph.errors import PoleHit
from qgraph.samples import random_bumps, random_hermitian


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--p1", type=int, default=3)
    ap.add_argument("--p2", type=int, default=1)
    ap.add_argument("--lambda-min", type=float, default=0.1)
    ap.add_argument("--lambda-max", type=float, default=10.0)
    ap.add_argument("--steps", type=int, default=40)
    ap.add_argument("--k-sum", choices=scattering.K_SUMS, default="all")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    m = args.m
    leads = [random_bumps(rng, m, 3.0, sign="any") for _ in range(args.p1)]
    fins = [(1.0, random_bumps(rng, m, 1.0, sign="any")) for _ in range(args.p2)]
    g = build_star(m, leads, fins, [random_hermitian(rng, m, 2.0) for _ in range(args.p2 + 1)])
    print("lambda  defect  |S_11|^2  sum_j>1 |S_j1|^2")
    for lam in np.linspace(args.lambda_min, args.lambda_max, args.steps):
        try:
            r = scattering.scattering_matrix(g, float(lam), args.k_sum)
        except PoleHit:
            print(f"{lam:7.3f}  pole")
            continue
        col = np.abs(r.S[:, :m]) ** 2
        refl = col[:m].sum() / m
        print(f"{lam:7.3f}  {r.unitarity_defect:.1e}  {refl:.4f}  {col[m:].sum() / m:.4f}")


if __name__ == "__main__":
    main()
