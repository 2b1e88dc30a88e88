"""Gauss-Bonnet residual t(R)/|R| over theta, tau and the strength of the Weyl factor."""

import argparse
from fractions import Fraction

import numpy as np

from nctorus import torusnum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=1024)
    ap.add_argument("--thetas", nargs="+", default=["0", "1/1024", "7/1024"])
    ap.add_argument("--sups", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0])
    ap.add_argument("--graded", action="store_true")
    args = ap.parse_args()

    taus = (1j, 1 / 3 + 1j, -0.5 + 2j)
    rng = np.random.default_rng(args.seed)
    print(f"{'theta':>8} {'tau':>10} {'sup h':>6} {'t(R)/|R|':>11} {'|R|':>10}")
    for sup in args.sups:
        h = torusnum.random_circle_fun(rng, 3, sup, args.grid)
        for theta in args.thetas:
            for tau in taus:
                P = torusnum.TorusParams.from_theta(Fraction(theta), tau, args.grid)
                R = torusnum.curvature_numeric(h, P, args.graded)
                res = torusnum.gauss_bonnet_check(h, P, args.graded)
                print(f"{theta:>8} {tau.real:+.2f}{tau.imag:+.1f}i {sup:6.2f} {res:11.2e} {R.norm():10.3e}")


if __name__ == "__main__":
    main()
