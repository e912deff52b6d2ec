"""Diagnose the A-cell (m=1, omega=1, mu=6) gw RMSE gap: clamped vs raw inversion."""
import math
import time

import numpy as np

from bdrates import Panel, Rates, SimConfig, simulate_panel
from bdrates.gw import gw_moments, _invert_flagged
from bdrates.simulate import BenchmarkCell, child_seed

MASTER = 20260817
TARGETS = {1: 5.03, 10: 2.82}


def raw_invert(mom):
    m, s2, dt = mom.m_hat, mom.sigma2_hat, mom.delta_t
    if abs(m - 1.0) <= 1e-9:
        lam = s2 / (2.0 * dt)
        return lam, lam
    half_omega = math.log(m) / (2.0 * dt)
    ratio = s2 / (m * (m - 1.0))
    return half_omega * (ratio + 1.0), half_omega * (ratio - 1.0)


def rmse(vals, truth):
    v = np.asarray(vals)
    return float(np.sqrt(np.mean((v - truth) ** 2)))


def boot_ci(vals, truth, n_boot=400, seed=5):
    rng = np.random.default_rng(seed)
    v = np.asarray(vals)
    stats = [rmse(v[rng.integers(0, len(v), len(v))], truth) for _ in range(n_boot)]
    return np.percentile(stats, [2.5, 97.5])


N_REPS = 5000
for ci, z0 in enumerate((1, 10)):
    cell = BenchmarkCell(rates=Rates(7.0, 6.0), z0=z0, n_obs=30, m=1, dt=0.1)
    t0 = time.time()
    clamped_lam, raw_lam, clamped_om, raw_om = [], [], [], []
    n_clamped = 0
    for rep in range(N_REPS):
        cfg = SimConfig(cell.rates, z0=cell.z0, obs_times=cell.obs_times(),
                        condition_nonextinct=True, seed=child_seed(MASTER, ci, rep))
        panel = simulate_panel(cfg, 1)
        mom = gw_moments(panel)
        rates, was_clamped = _invert_flagged(mom)
        n_clamped += was_clamped
        clamped_lam.append(rates.lam)
        clamped_om.append(rates.lam - rates.mu)
        rl, rm = raw_invert(mom)
        raw_lam.append(rl)
        raw_om.append(rl - rm)
    took = time.time() - t0
    r_cl = rmse(clamped_lam, 7.0)
    r_raw = rmse(raw_lam, 7.0)
    lo_cl, hi_cl = boot_ci(clamped_lam, 7.0)
    lo_raw, hi_raw = boot_ci(raw_lam, 7.0)
    print(f"z0={z0}: target={TARGETS[z0]}  clamped={r_cl:.3f} [{lo_cl:.3f},{hi_cl:.3f}]  "
          f"raw={r_raw:.3f} [{lo_raw:.3f},{hi_raw:.3f}]  clamp_rate={n_clamped/N_REPS:.3f}  ({took:.1f}s)")
    rv = np.asarray(raw_lam)
    print(f"    raw lam quantiles: min={rv.min():.2f} q01={np.quantile(rv,0.01):.2f} "
          f"q50={np.quantile(rv,0.5):.2f} q99={np.quantile(rv,0.99):.2f} max={rv.max():.2f}")
    print(f"    omega rmse clamped={rmse(clamped_om,1.0):.3f} raw={rmse(raw_om,1.0):.3f}")
