"""Calibrate the high-mass region definition for the SPA accuracy band.

Candidates: central interquantile windows [q, 1-q] of the k>=1 mass, and
mode-relative cutoffs p_k >= c * max_j p_j.  For each: max |p~/p - 1| for the
plain SPA at a in {5,10,20,40}, lam=7, mu=5, t=1.  Requirements:
  (i) max err monotone decreasing in a
  (ii) a * maxerr within factor-3 band (max/min <= 3)
  (iii) maxerr(a=20) <= 0.04
"""
import math
import numpy as np
from bdrates.exact import geom_params, truncation_limit, _log_pmf
from bdrates.types import Rates
from bdrates.saddlepoint import spa_pmf

rates = Rates(7.0, 5.0)
t = 1.0
g = geom_params(t, rates)

data = {}
for a in (5, 10, 20, 40):
    K = truncation_limit(t, a, rates)
    ks = np.arange(1, K + 1)
    logp = np.array([_log_pmf(int(k), a, g) for k in ks])
    p = np.exp(logp)
    ptil = np.array([spa_pmf(int(k), t, a, rates) for k in ks])
    err = np.abs(ptil / p - 1.0)
    data[a] = (ks, p, err)
    print(f"a={a}: K={K}, sum p(k>=1)={p.sum():.8f}")

def window_quantile(ks, p, qlo, qhi):
    # quantiles of the mass restricted to k>=1
    c = np.cumsum(p) / p.sum()
    lo = ks[np.searchsorted(c, qlo)]
    hi = ks[np.searchsorted(c, qhi)]
    return (ks >= lo) & (ks <= hi)

def window_moderel(ks, p, frac):
    return p >= frac * p.max()

def assess(name, maskfn):
    errs = {}
    for a, (ks, p, err) in data.items():
        m = maskfn(ks, p)
        errs[a] = err[m].max()
    vals = [errs[a] for a in (5, 10, 20, 40)]
    scaled = [a * errs[a] for a in (5, 10, 20, 40)]
    mono = all(x > y for x, y in zip(vals, vals[1:]))
    band = max(scaled) / min(scaled)
    ok20 = errs[20] <= 0.04
    flag = "PASS" if (mono and band <= 3.0 and ok20) else "fail"
    print(f"{name:28s} errs={['%.4f' % v for v in vals]} "
          f"a*err={['%.3f' % s for s in scaled]} band={band:.2f} "
          f"mono={mono} ok20={ok20}  {flag}")

for q in (0.05, 0.10, 0.125, 0.15, 0.20, 0.25):
    assess(f"quantile [{q},{1-q}]", lambda ks, p, q=q: window_quantile(ks, p, q, 1 - q))
for c in (0.5, 0.2, 0.1, 0.05, 0.01, 0.001):
    assess(f"mode-rel c={c}", lambda ks, p, c=c: window_moderel(ks, p, c))
