"""Secure/insecure boundary p_det(mu) for several error policies.

    python scripts/boundary_curves.py --out boundary_curves.csv
"""

import argparse
import csv
import sys

import numpy as np

from relcommit.cli import REFERENCE_OPERATING_POINT
from relcommit.security import asymptotic_rhs
from relcommit.states import bb84_family, lambda1_of


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.0, 0.034, 0.05, 0.1])
    ap.add_argument("--mu-max", type=float, default=0.2)
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    lam1 = lambda1_of(bb84_family())
    mus = np.linspace(args.mu_max / args.steps, args.mu_max, args.steps)
    fp = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(["mu"] + [f"delta={d:g}" for d in args.deltas])
    for mu in mus:
        w.writerow([f"{mu:.6g}"] + [f"{asymptotic_rhs(mu, d, lam1):.6g}" for d in args.deltas])
    mu0, p0 = REFERENCE_OPERATING_POINT
    for d in args.deltas:
        rhs = asymptotic_rhs(mu0, d, lam1)
        print(f"# delta={d:g}: boundary at mu={mu0} is {rhs:.5f}, p_det={p0} {'secure' if p0 > rhs else 'insecure'}",
              file=sys.stderr)
    if args.out:
        fp.close()


if __name__ == "__main__":
    main()
