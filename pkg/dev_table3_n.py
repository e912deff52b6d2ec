"""Test the halved-horizon hypothesis for the top benchmark block."""
import math
import time

import numpy as np

from bdrates import Rates, SimConfig, simulate_panel
from bdrates.gw import gw_moments, _invert_flagged
from bdrates.simulate import BenchmarkCell, child_seed

MASTER = 20260817
PAPER_GW = {1: 5.03, 5: 3.38, 10: 2.82, 20: 2.68, 50: 2.56}


def rmse(vals, truth):
    v = np.asarray(vals)
    return float(np.sqrt(np.mean((v - truth) ** 2)))


for n_obs in (14, 15):
    floor = 13.0 / math.sqrt(2 * n_obs)
    print(f"n_obs={n_obs} (theory floor {floor:.3f}):")
    for ci, z0 in enumerate((1, 5, 10, 20, 50)):
        cell = BenchmarkCell(rates=Rates(7.0, 6.0), z0=z0, n_obs=n_obs, m=1, dt=0.1)
        t0 = time.time()
        lams = []
        for rep in range(5000):
            cfg = SimConfig(cell.rates, z0=cell.z0, obs_times=cell.obs_times(),
                            condition_nonextinct=True,
                            seed=child_seed(MASTER, 10 + n_obs, ci, rep))
            panel = simulate_panel(cfg, 1)
            rates, _ = _invert_flagged(gw_moments(panel))
            lams.append(rates.lam)
        r = rmse(lams, 7.0)
        took = time.time() - t0
        print(f"  z0={z0:>2}: gw rmse={r:.3f}  paper={PAPER_GW[z0]}  "
              f"ratio={r/PAPER_GW[z0]:.3f}  ({took:.1f}s)")
