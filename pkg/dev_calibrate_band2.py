"""Error profile of the plain spa vs k, and central quantile windows."""
import math

from bdrates import Rates
from bdrates.exact import log_transition_prob, truncation_limit
from bdrates.saddlepoint import spa_pmf

r75 = Rates(7.0, 5.0)
t = 1.0

for a in (5, 10, 20, 40):
    kmax = truncation_limit(t, a, r75)
    p = [math.exp(log_transition_prob(k, t, a, r75)) for k in range(1, kmax + 1)]
    print(f"a={a}: err at k =", end="")
    for k in (1, 2, 5, 10, 20, 30, 50, 80, 120, 200, 300):
        if k <= kmax:
            e = spa_pmf(k, t, a, r75) / p[k - 1] - 1
            print(f" {k}:{e:+.3f}", end="")
    print()

def quantile_window(a, lo_q, hi_q):
    kmax = truncation_limit(t, a, r75)
    p0 = math.exp(log_transition_prob(0, t, a, r75))
    ps = [math.exp(log_transition_prob(k, t, a, r75)) for k in range(1, kmax + 1)]
    cum = p0
    klo = khi = None
    for k, pk in enumerate(ps, start=1):
        cum += pk
        if klo is None and cum >= lo_q:
            klo = k
        if khi is None and cum >= hi_q:
            khi = k
            break
    return klo, khi if khi is not None else kmax

for lo_q, hi_q in [(0.01, 0.99), (0.025, 0.975), (0.05, 0.95), (0.10, 0.90)]:
    print(f"\nquantile window [{lo_q}, {hi_q}]:")
    errs = {}
    for a in (5, 10, 20, 40):
        klo, khi = quantile_window(a, lo_q, hi_q)
        worst, wk = 0.0, None
        for k in range(klo, khi + 1):
            pk = math.exp(log_transition_prob(k, t, a, r75))
            e = abs(spa_pmf(k, t, a, r75) / pk - 1)
            if e > worst:
                worst, wk = e, k
        errs[a] = worst
        print(f"  a={a:3d}: k in [{klo},{khi}] err={worst:.5f} at k={wk}")
    scaled = [a * errs[a] for a in (5, 10, 20, 40)]
    mono = all(errs[x] > errs[y] for x, y in [(5, 10), (10, 20), (20, 40)])
    print(f"  monotone={mono} a*err=[{min(scaled):.3f},{max(scaled):.3f}] ratio={max(scaled)/min(scaled):.2f} err(20)={errs[20]:.4f}")
