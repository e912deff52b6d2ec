"""Relative accuracy of the saddlepoint pmf against the exact law.

For a growing ancestor count a, evaluates the plain and the
extinction-conditioned saddlepoint approximations over the central
mass window of the positive part of the transition law, and reports
the worst relative error in that window. The plain approximation's
error should shrink like 1/a (the a * err column stays flat); the
conditioned variant should track or beat it at small a.
"""

import argparse
import math
import sys

from bdrates import Rates, high_mass_region, log_transition_prob
from bdrates import spa_pmf, spa_pmf_conditional


def worst_rel_err(fn, t: float, a: int, rates: Rates) -> float:
    k_lo, k_hi = high_mass_region(t, a, rates)
    worst = 0.0
    for k in range(k_lo, k_hi + 1):
        p = math.exp(log_transition_prob(k, t, a, rates))
        worst = max(worst, abs(fn(k, t, a, rates) - p) / p)
    return worst


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda", dest="lam", type=float, default=7.0)
    ap.add_argument("--mu", type=float, default=5.0)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument(
        "--ancestors", default="5,10,20,40",
        help="comma list of starting counts a",
    )
    args = ap.parse_args(argv)

    rates = Rates(args.lam, args.mu)
    ancestors = [int(s) for s in args.ancestors.split(",") if s.strip()]

    print(f"{'a':>5} {'plain':>10} {'a*plain':>10} {'conditional':>12}")
    for a in ancestors:
        plain = worst_rel_err(spa_pmf, args.t, a, rates)
        cond = worst_rel_err(spa_pmf_conditional, args.t, a, rates)
        print(f"{a:>5} {plain:>10.4g} {a * plain:>10.4g} {cond:>12.4g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
