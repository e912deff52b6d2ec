"""Calibrate the region over which the spa/exact ratio band is measured."""
import math

from bdrates import Rates
from bdrates.exact import log_transition_prob, truncation_limit, mean, variance
from bdrates.saddlepoint import spa_pmf

r75 = Rates(7.0, 5.0)
t = 1.0

pmfs = {}
for a in (5, 10, 20, 40):
    kmax = truncation_limit(t, a, r75)
    p = [math.exp(log_transition_prob(k, t, a, r75)) for k in range(1, kmax + 1)]
    pmfs[a] = p

def band_err(a, region):
    p = pmfs[a]
    worst, wk = 0.0, None
    for k in region:
        e = abs(spa_pmf(k, t, a, r75) / p[k - 1] - 1)
        if e > worst:
            worst, wk = e, k
    return worst, wk

for name, regfun in [
    ("p >= 1e-2 * pmax", lambda a: [k for k in range(1, len(pmfs[a]) + 1) if pmfs[a][k-1] >= 1e-2 * max(pmfs[a])]),
    ("p >= 1e-3 * pmax", lambda a: [k for k in range(1, len(pmfs[a]) + 1) if pmfs[a][k-1] >= 1e-3 * max(pmfs[a])]),
    ("p >= 1e-4 * pmax", lambda a: [k for k in range(1, len(pmfs[a]) + 1) if pmfs[a][k-1] >= 1e-4 * max(pmfs[a])]),
    ("mean +/- 3 sd", lambda a: range(max(1, int(mean(t, a, r75) - 3 * variance(t, a, r75) ** 0.5)), int(mean(t, a, r75) + 3 * variance(t, a, r75) ** 0.5) + 1)),
    ("mean +/- 4 sd", lambda a: range(max(1, int(mean(t, a, r75) - 4 * variance(t, a, r75) ** 0.5)), int(mean(t, a, r75) + 4 * variance(t, a, r75) ** 0.5) + 1)),
]:
    errs = {}
    lo_k = {}
    for a in (5, 10, 20, 40):
        reg = list(regfun(a))
        errs[a], wk = band_err(a, reg)
        lo_k[a] = (min(reg), max(reg), wk)
    scaled = [a * errs[a] for a in (5, 10, 20, 40)]
    mono = all(errs[x] > errs[y] for x, y in [(5, 10), (10, 20), (20, 40)])
    print(f"{name}:")
    for a in (5, 10, 20, 40):
        print(f"   a={a:3d}: err={errs[a]:.5f} (k range {lo_k[a][0]}..{lo_k[a][1]}, worst at {lo_k[a][2]})")
    print(f"   monotone={mono}  a*err in [{min(scaled):.3f},{max(scaled):.3f}] ratio={max(scaled)/min(scaled):.2f}  err(a=20)={errs[20]:.4f}\n")
