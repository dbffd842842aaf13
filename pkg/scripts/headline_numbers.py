"""Security figures at the reference operating point, plus the single
parameter changes that would bring eps_finite down to a target value.

    python scripts/headline_numbers.py [--target 5.5e-8]
"""

import argparse
import json
from dataclasses import replace

from scipy.optimize import brentq

from relcommit.security import ProtocolParams, eps_finite, security_report
from relcommit.spacetime import SiteLayout

REF = ProtocolParams(n=2_200_000, mu=0.05, eta=0.06, q=0.034, delta=0.05, gamma=0.002)
GENEVA, SINGAPORE = (46.20, 6.15), (1.30, 103.80)


def solve(field, lo, hi, target):
    f = lambda v: eps_finite(replace(REF, **{field: v})) - target
    if f(lo) * f(hi) > 0:
        return None
    return brentq(f, lo, hi, xtol=1e-10)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--target", type=float, default=5.5e-8)
    args = ap.parse_args()

    layout = SiteLayout({"A1": GENEVA, "B1": GENEVA, "A2": SINGAPORE, "B2": SINGAPORE})
    print(f"chord distance      {layout.chord_distance_m / 1e3:.1f} km")
    print(f"commitment duration {layout.commitment_duration_s * 1e3:.4f} ms")
    print(json.dumps(security_report(REF).to_dict(), indent=2, sort_keys=True))

    print(f"\nsingle-parameter values giving eps_finite = {args.target:g}:")
    for field, lo, hi in (("mu", 0.001, 0.05), ("gamma", 0.002, 0.01), ("delta", 0.0, 0.05)):
        v = solve(field, lo, hi, args.target)
        print(f"  {field:6s} {'no root in range' if v is None else f'{v:.6g}'}")


if __name__ == "__main__":
    main()
