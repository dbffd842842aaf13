"""Multi-photon attack success rate against the finite-size bound, swept over mu.

    python scripts/attack_sweep.py --trials 500
"""

import argparse
import math
from dataclasses import replace

import numpy as np

from relcommit.adversary import simulate_multiphoton_attack
from relcommit.security import ProtocolParams, eps_finite

REF = ProtocolParams(n=2_200_000, mu=0.05, eta=0.06, q=0.034, delta=0.05, gamma=0.002)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mus", type=float, nargs="+", default=[0.02, 0.03, 0.04, 0.045, 0.05, 0.055, 0.06, 0.08])
    args = ap.parse_args()

    streams = np.random.SeedSequence(args.seed).spawn(len(args.mus))
    print(f"{'mu':>7} {'success':>9} {'+-2se':>7} {'eps_finite':>11}")
    for mu, ss in zip(args.mus, streams):
        p = replace(REF, mu=mu)
        rate = simulate_multiphoton_attack(p, np.random.default_rng(ss), args.trials).mean()
        se = math.sqrt(max(rate * (1 - rate), 1 / args.trials) / args.trials)
        print(f"{mu:7.3f} {rate:9.4f} {2 * se:7.4f} {eps_finite(p):11.3g}")


if __name__ == "__main__":
    main()
