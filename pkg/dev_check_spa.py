"""Scratch validation of the saddlepoint module: CGF derivatives vs the
mpmath oracle, accuracy bands vs the exact pmf, conditional variant."""
import math
import sys

sys.path.insert(0, "tests")
from oracles import mp_cgf, mp_cgf_derivative

from bdrates import Rates
from bdrates.exact import log_transition_prob, truncation_limit
from bdrates.saddlepoint import (
    cgf_eval, radius, solve_saddlepoint, spa_pmf, spa_pmf_normalized,
    spa_pmf_conditional,
)

r75 = Rates(7.0, 5.0)

print("CGF vs oracle:")
for (lam, mu, t, a) in [(7, 5, 1.0, 1), (7, 5, 1.0, 10), (5, 7, 1.0, 3), (2, 2, 1.5, 4), (7, 6, 0.07, 10)]:
    rr = Rates(lam, mu)
    R = radius(t, rr)
    for x in (-3.0, -0.5, 0.0, 0.5 * math.log(R)):
        pt = cgf_eval(x, t, a, rr)
        K_o = float(mp_cgf(x, t, a, lam, mu))
        K1_o = float(mp_cgf_derivative(x, t, a, lam, mu, 1))
        K2_o = float(mp_cgf_derivative(x, t, a, lam, mu, 2))
        for got, want, name in ((pt.value, K_o, "K"), (pt.d1, K1_o, "K1"), (pt.d2, K2_o, "K2")):
            rel = abs(got - want) / max(abs(want), 1e-12)
            assert rel < 1e-9, (lam, mu, t, a, x, name, got, want)
    print(f"  ({lam},{mu}) t={t} a={a}: OK (R={R:.6g})")

print("\nsaddlepoint residuals and monotonicity:")
for a in (1, 5, 10, 20):
    prev = -math.inf
    for k in range(1, 200, 7):
        sol = solve_saddlepoint(k, 1.0, a, r75)
        assert abs(sol.residual) <= 1e-10 * max(1, k), (a, k, sol.residual)
        assert sol.x_tilde > prev, (a, k)
        prev = sol.x_tilde
print("  OK; x~ at k=mean:", solve_saddlepoint(int(round(10 * math.e ** 2)), 1.0, 10, r75).x_tilde)

print("\naccuracy band vs exact (lam=7, mu=5, t=1):")
errs = {}
for a in (5, 10, 20, 40):
    kmax = truncation_limit(1.0, a, r75)
    worst = 0.0
    worst_k = None
    for k in range(1, kmax + 1):
        lp = log_transition_prob(k, 1.0, a, r75)
        p = math.exp(lp)
        if p <= 1e-8:
            continue
        ratio = spa_pmf(k, 1.0, a, r75) / p
        if abs(ratio - 1) > worst:
            worst, worst_k = abs(ratio - 1), k
    errs[a] = worst
    print(f"  a={a:3d}: max|ratio-1| = {worst:.5f} at k={worst_k}   a*err = {a*worst:.4f}")
print("  monotone decreasing:", all(errs[a] > errs[b] for a, b in [(5, 10), (10, 20), (20, 40)]))
vals = [a * errs[a] for a in (5, 10, 20, 40)]
print(f"  a*err band: [{min(vals):.4f}, {max(vals):.4f}]  ratio {max(vals)/min(vals):.3f}")

print("\nnormalized and conditional at a=10, t=1:")
a = 10
sup_plain = sup_norm = sup_cond = 0.0
for k in range(1, 6):
    p = math.exp(log_transition_prob(k, 1.0, a, r75))
    pl = spa_pmf(k, 1.0, a, r75)
    no = spa_pmf_normalized(k, 1.0, a, r75)
    co = spa_pmf_conditional(k, 1.0, a, r75)
    print(f"  k={k}: exact={p:.6e} plain={pl:.6e} norm={no:.6e} cond={co:.6e}")
    sup_plain = max(sup_plain, abs(pl - p))
    sup_norm = max(sup_norm, abs(no - p))
    sup_cond = max(sup_cond, abs(co - p))
print(f"  sup|err| k in 1..5: plain={sup_plain:.3e} normalized={sup_norm:.3e} conditional={sup_cond:.3e}")

# normalized closer than plain over all k>=1 (sup norm)
kmax = truncation_limit(1.0, a, r75)
s_pl = s_no = 0.0
for k in range(1, kmax + 1):
    p = math.exp(log_transition_prob(k, 1.0, a, r75))
    s_pl = max(s_pl, abs(spa_pmf(k, 1.0, a, r75) - p))
    s_no = max(s_no, abs(spa_pmf_normalized(k, 1.0, a, r75) - p))
print(f"  global sup: plain={s_pl:.3e} normalized={s_no:.3e} (normalized better: {s_no < s_pl})")

# conditional large-a central agreement with plain
a = 50
me = 50 * math.e ** 2
agree = max(
    abs(spa_pmf_conditional(k, 1.0, a, r75) / spa_pmf(k, 1.0, a, r75) - 1)
    for k in range(int(me * 0.7), int(me * 1.3), 5)
)
print(f"  a=50 central plain-vs-cond max rel diff: {agree:.2e}")
print("done")
