"""Sample LBDP paths at discrete times via the exact transition law
(inverse CDF) and print frozen panels for the estimate tests."""
import math

import numpy as np

from bdrates.exact import _log_pmf, geom_params
from bdrates.types import Rates


def sample_path(rng, a, rates, dt, n_steps):
    g = geom_params(dt, rates)
    counts = [a]
    cur = a
    for _ in range(n_steps):
        if cur == 0:
            counts.append(0)
            continue
        gg = geom_params(dt, rates) if False else g
        u = rng.random()
        acc = 0.0
        k = 0
        while True:
            acc += math.exp(_log_pmf(k, cur, gg))
            if acc >= u or k > 100000:
                break
            k += 1
        counts.append(k)
        cur = k
    return counts


rng = np.random.default_rng(20260817)
rates = Rates(7.0, 5.0)

# panel A: a=10, dt=0.1, 19 transitions, min count >= 5
for trial in range(200):
    c = sample_path(rng, 10, rates, 0.1, 19)
    if min(c) >= 5:
        print("PANEL_A =", c)
        break

# panel B: a=60, dt=0.1, 10 transitions, min count >= 50
for trial in range(200):
    c = sample_path(rng, 60, rates, 0.1, 10)
    if min(c) >= 50:
        print("PANEL_B =", c)
        break

# panel C: unequal spacing, a=8, gaps drawn U[0.05, 0.25]
for trial in range(200):
    gaps = np.round(rng.uniform(0.05, 0.25, size=8), 3)
    cur = 8
    counts = [8]
    ok = True
    for gp in gaps:
        g = geom_params(float(gp), rates)
        u = rng.random()
        acc = 0.0
        k = 0
        while True:
            acc += math.exp(_log_pmf(k, cur, g))
            if acc >= u or k > 100000:
                break
            k += 1
        counts.append(k)
        cur = k
        if cur == 0:
            ok = False
            break
    if ok and min(counts) >= 2:
        print("PANEL_C_TIMES =", [0.0] + list(np.cumsum(gaps)))
        print("PANEL_C_COUNTS =", counts)
        break
