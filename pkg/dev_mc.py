"""Measure every slow MC property before freezing the tests."""
import math
import random
import time

import numpy as np

from bdrates import (
    FitOptions,
    Panel,
    Rates,
    SimConfig,
    fit,
    gw_estimate,
    qg_fit,
    qg_profile_xi,
    run_benchmark,
    simulate_panel,
    simulate_trajectory,
    variance,
)
from bdrates.simulate import BenchmarkCell, child_seed

MASTER = 20260817


def theorem1_se(rates, dt, n_obs, m_traj):
    m = math.exp((rates.lam - rates.mu) * dt)
    s2 = variance(dt, 1, rates)
    return abs(math.log(m)) * s2 / math.sqrt(
        2 * dt * dt * m * m * (m - 1) ** 2 * n_obs * m_traj
    )


def run_gw_se(z0, n_reps, n_obs=60):
    rates = Rates(7.0, 6.0)
    dt = 0.07
    obs = tuple(dt * (j + 1) for j in range(n_obs))
    lam_hats, om_hats, se_oms = [], [], []
    for r in range(n_reps):
        cfg = SimConfig(rates, z0=z0, obs_times=obs, condition_nonextinct=True,
                        seed=child_seed(MASTER, 1, z0, r))
        panel = Panel((simulate_trajectory(cfg),))
        est = gw_estimate(panel)
        lam_hats.append(est.rates.lam)
        om_hats.append(est.rates.lam - est.rates.mu)
        se_oms.append(est.se_omega)
    return np.array(lam_hats), np.array(om_hats), np.array(se_oms)


t0 = time.time()
lam10, om10, seom10 = run_gw_se(10, 2000)
t1 = time.time()
pred = theorem1_se(Rates(7.0, 6.0), 0.07, 60, 1)
sd_lam = lam10.std(ddof=1)
print(f"[1] gw Theorem-1: sd(lam)={sd_lam:.4f} predicted={pred:.4f} "
      f"ratio={sd_lam/pred:.3f}  ({t1-t0:.1f}s)")
print(f"    sd(om)={om10.std(ddof=1):.4f} mean reported se_om={seom10.mean():.4f} "
      f"ratio={om10.std(ddof=1)/seom10.mean():.3f}")

t0 = time.time()
lam40, om40, _ = run_gw_se(40, 500)
lam10b, om10b, _ = lam10[:500], om10[:500], None
t1 = time.time()
r_om = om40.var(ddof=1) / om10b.var(ddof=1)
r_lam = lam40.var(ddof=1) / lam10b.var(ddof=1)
print(f"[1b] var ratios z0 40/10: omega={r_om:.3f} (want <0.5) lambda={r_lam:.3f} "
      f"(want in [0.5,2])  ({t1-t0:.1f}s)")

# --- qg xi consistency at true omega
t0 = time.time()
rates = Rates(7.0, 5.0)
xis = []
for r in range(100):
    cfg = SimConfig(rates, z0=5, obs_times=(0.1, 0.2, 0.3, 0.4),
                    seed=child_seed(MASTER, 2, r))
    panel = simulate_panel(cfg, 200)
    xis.append(qg_profile_xi(panel, 2.0))
xis = np.array(xis)
t1 = time.time()
print(f"[2] qg xi consistency: mean xi_hat={xis.mean():.4f} true=12 "
      f"rel={abs(xis.mean()-12)/12:.4f}  ({t1-t0:.1f}s)")

# --- qg bias on unequal panels
t0 = time.time()
lam_hats = []
for r in range(200):
    ur = random.Random(child_seed(MASTER, 3, r))
    gaps = [ur.uniform(0.05, 0.2) for _ in range(6)]
    times = tuple(np.cumsum(gaps))
    cfg = SimConfig(rates, z0=5, obs_times=times, seed=child_seed(MASTER, 3, r, 1))
    panel = simulate_panel(cfg, 100)
    lam_hats.append(qg_fit(panel).rates.lam)
lam_hats = np.array(lam_hats)
t1 = time.time()
print(f"[3] qg bias: mean lam_hat={lam_hats.mean():.4f} bias={lam_hats.mean()-7:.4f} "
      f"(want |bias|<0.2)  ({t1-t0:.1f}s)")

# --- qg coverage
t0 = time.time()
hits = 0
times = (0.1, 0.25, 0.4, 0.6)
for r in range(500):
    cfg = SimConfig(rates, z0=5, obs_times=times, seed=child_seed(MASTER, 4, r))
    panel = simulate_panel(cfg, 50)
    f = qg_fit(panel)
    if f.cov_lambda_mu is not None:
        se = math.sqrt(f.cov_lambda_mu[0, 0])
        if abs(f.rates.lam - 7.0) <= 1.959963984540054 * se:
            hits += 1
t1 = time.time()
print(f"[4] qg coverage: {hits}/500 = {hits/500:.3f} (want in [0.90, 0.98])  ({t1-t0:.1f}s)")

# --- mle SE calibration
t0 = time.time()
lam_hats, ses = [], []
obs = tuple(0.1 * (j + 1) for j in range(6))
for r in range(100):
    cfg = SimConfig(rates, z0=5, obs_times=obs, condition_nonextinct=True,
                    seed=child_seed(MASTER, 5, r))
    panel = simulate_panel(cfg, 10)
    res = fit(panel, "mle", FitOptions(seed=child_seed(MASTER, 5, r, 1)))
    if res.cov is not None:
        lam_hats.append(res.rates.lam)
        ses.append(res.se_lambda)
lam_hats, ses = np.array(lam_hats), np.array(ses)
t1 = time.time()
print(f"[5] mle SE: n={len(ses)} empirical sd={lam_hats.std(ddof=1):.4f} "
      f"mean se={ses.mean():.4f} ratio={ses.mean()/lam_hats.std(ddof=1):.3f} "
      f"(want within 25%)  ({t1-t0:.1f}s)")

# --- Fig-3 shape: gw rmse decreasing in N
t0 = time.time()
rates36 = Rates(7.0, 6.0)
rmses = {}
for n_obs in (10, 20, 40, 60):
    cell = BenchmarkCell(rates36, z0=10, n_obs=n_obs, m=1, dt=0.07)
    rep = run_benchmark(cell, ["gw"], n_replicates=400, seed=child_seed(MASTER, 6, n_obs))[0]
    rmses[n_obs] = rep.rows[0].rmse_lambda
t1 = time.time()
print(f"[6] fig3 gw rmse by N: {rmses}  ({t1-t0:.1f}s)")

# --- Fig-4 shape: gw-spmle gap z0=1 vs z0=20
t0 = time.time()
gaps = {}
for z0 in (1, 20):
    cell = BenchmarkCell(rates36, z0=z0, n_obs=10, m=1, dt=0.1)
    rep = run_benchmark(cell, ["gw", "spmle"], n_replicates=150,
                        seed=child_seed(MASTER, 7, z0))[0]
    by = {row.method: row.rmse_lambda for row in rep.rows}
    gaps[z0] = by["gw"] - by["spmle"]
    print(f"    z0={z0}: gw={by['gw']:.3f} spmle={by['spmle']:.3f} gap={gaps[z0]:.3f}")
t1 = time.time()
print(f"[7] fig4 gaps: z0=1 {gaps[1]:.3f} > z0=20 {gaps[20]:.3f}?  ({t1-t0:.1f}s)")
