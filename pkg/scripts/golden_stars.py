"""Golden star examples: the m = 2 star whose coupling signs hide a zero count,
and the scalar star where the alpha-sum bound overshoots by one."""

import argparse

import numpy as np

from qgraph import build_star, negspec, oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=1e-3)
    ap.add_argument("--L", type=float, default=50.0)
    args = ap.parse_args()
    params = oracle.DiscretizationParams(h=args.h, L_trunc=args.L)
    cases = {
        "m=2, alpha(0)=diag(-1,5), alpha(v1)=diag(6,-1), l=0.5":
            build_star(2, [None], [(0.5, None)], [np.diag([-1.0, 5.0]), np.diag([6.0, -1.0])]),
        "m=1, alpha(0)=alpha(v1)=-1, l=0.5":
            build_star(1, [None], [(0.5, None)], [-1.0, -1.0]),
    }
    np.set_printoptions(precision=4, suppress=True)
    for name, g in cases.items():
        rep = negspec.kappa_star(g, method="both", params=params)
        print(name)
        print(negspec.assemble_T1(g).real + 0.0)
        print(f"  inertia(T1) = {rep.kappa_weyl}, oracle = {rep.kappa_oracle}, "
              f"alpha-sum bound = {rep.alpha_sum_bound}, Bargmann bound = {rep.bargmann_bound}")
        print(f"  lowest eigenvalues: {oracle.eigen_bottom(g, params, 2)}")


if __name__ == "__main__":
    main()
