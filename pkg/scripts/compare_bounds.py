#!/usr/bin/env python3
"""Print the bound sandwich and comparator values for a sweep of test functions.

A quick way to see where the operator-based bounds beat the classical ones:
on the exponential family our upper bound stays finite for h = sqrt(x) while
Klaassen's diverges, and it always sits below Cacoullos'.

Usage:
    python scripts/compare_bounds.py [--family exponential] [--rate 1.0]
"""

import argparse
import math
import sys

from steinb.bounds import bound_report
from steinb.families import Scale, exponential, gamma, linear, polynomial, sqrt_fn, square


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--family", choices=("exponential", "gamma"), default="exponential")
    parser.add_argument("--rate", type=float, default=1.0)
    parser.add_argument("--shape", type=float, default=3.0, help="gamma shape (ignored otherwise)")
    args = parser.parse_args()

    if args.family == "exponential":
        fam = exponential(Scale(args.rate))
    else:
        fam = gamma(Scale(args.rate), shape=args.shape)

    sweep = [
        linear(),
        square(),
        sqrt_fn(),
        polynomial([0.0, 1.0, 0.5], name="x+x^2/2"),
        polynomial([0.0, 0.0, 0.0, 1.0], name="x^3"),
    ]
    fmt = lambda v: "inf" if math.isinf(v) else f"{v:.6f}"
    print(f"{'h':12s} {'lower':>12s} {'variance':>12s} {'upper':>12s}  comparators")
    for h in sweep:
        rep = bound_report(fam, h)
        comps = ", ".join(f"{c.name}={fmt(c.value)}" for c in rep.comparators)
        print(
            f"{h.name:12s} {fmt(rep.lower):>12s} {fmt(rep.variance_truth):>12s} "
            f"{fmt(rep.upper):>12s}  {comps}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
