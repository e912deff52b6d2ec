"""Scratch validation of the exact module against the mpmath oracle."""
import math
import sys

sys.path.insert(0, "tests")
import mpmath as mp
from oracles import mp_transition_prob, mp_alpha_beta, mp_pgf

from bdrates import Rates
from bdrates.exact import (
    alpha_beta, log_transition_prob, pgf, mean, variance,
    truncation_limit, geom_params, convergence_radius,
)

CONFIGS = [
    (7.0, 5.0, 1.0), (7.0, 6.0, 0.5), (5.0, 7.0, 1.0), (1.0, 1.0, 2.0),
    (2.0, 2.0 + 1e-12, 1.0), (3.0, 0.0, 0.7), (0.0, 3.0, 0.7),
    (0.5, 0.4, 10.0), (7.0, 5.0, 3.0), (1.2, 0.8, 0.3),
]

worst = 0.0
for lam, mu, t in CONFIGS:
    r = Rates(lam, mu)
    a_o, b_o = mp_alpha_beta(t, lam, mu) if lam != mu else mp_alpha_beta(t, lam, lam)
    a_p, b_p = alpha_beta(t, r)
    ea = abs(a_p - float(a_o)) / max(float(a_o), 1e-300)
    eb = abs(b_p - float(b_o)) / max(float(b_o), 1e-300)
    print(f"lam={lam} mu={mu} t={t}: alpha={a_p:.12g} (rel {ea:.2e}) beta={b_p:.12g} (rel {eb:.2e})")
    for a in (1, 2, 5, 20):
        for k in (0, 1, 2, 5, a, 2 * a, 5 * a + 3):
            lp = log_transition_prob(k, t, a, r)
            p_o = mp_transition_prob(k, t, a, lam, mu)
            if p_o == 0:
                assert lp == float("-inf"), (lam, mu, t, a, k, lp)
                continue
            rel = abs(math.exp(lp) - float(p_o)) / float(p_o)
            worst = max(worst, rel)
            if rel > 1e-10:
                print(f"  BAD pmf a={a} k={k}: {math.exp(lp):.17g} vs {mp.nstr(p_o, 17)} rel={rel:.2e}")
print("worst pmf rel error:", worst)

# normalization with truncation rule
print("\nnormalization:")
for lam, mu, t in CONFIGS:
    r = Rates(lam, mu)
    for a in (1, 3, 20):
        K = truncation_limit(t, a, r)
        s = sum(math.exp(log_transition_prob(k, t, a, r)) for k in range(0, K + 1))
        print(f"  lam={lam} mu={mu} t={t} a={a}: K={K} sum-1={s-1:.3e}")
        assert abs(s - 1) <= 1e-8, "normalization failed"

# pgf vs oracle, mean/variance vs oracle moments
print("\npgf/mean/variance:")
for lam, mu, t in [(7, 5, 1.0), (5, 7, 1.0), (2, 2, 1.5), (3, 0, 0.5), (0, 3, 0.5)]:
    r = Rates(lam, mu)
    R = convergence_radius(t, r)
    for s in (0.0, 0.3, 1.0, min(1.0 + (R - 1.0) * 0.5, 2.0) if math.isfinite(R) else 1.5):
        v = pgf(s, t, r, a=3)
        o = float(mp_pgf(s, t, 3, lam, mu))
        assert abs(v - o) <= 1e-12 * max(1.0, abs(o)), (lam, mu, t, s, v, o)
    a = 4
    K = truncation_limit(t, a, r)
    m_num = sum(k * math.exp(log_transition_prob(k, t, a, r)) for k in range(0, K + 1))
    v_num = sum(k * k * math.exp(log_transition_prob(k, t, a, r)) for k in range(0, K + 1)) - m_num ** 2
    print(f"  lam={lam} mu={mu}: mean {mean(t, a, r):.10g} vs {m_num:.10g}; var {variance(t, a, r):.10g} vs {v_num:.10g}")
    assert abs(mean(t, a, r) - m_num) <= 1e-7 * m_num
    assert abs(variance(t, a, r) - v_num) <= 1e-7 * v_num

# critical continuity: lam = mu*(1 +/- 1e-7) vs lam = mu
print("\ncritical continuity:")
mu0 = 2.0
for k, a in [(0, 1), (3, 2), (10, 5)]:
    base = log_transition_prob(k, 1.3, a, Rates(mu0, mu0))
    for eps in (1e-7, -1e-7):
        near = log_transition_prob(k, 1.3, a, Rates(mu0 * (1 + eps), mu0))
        d = abs(math.exp(near) - math.exp(base))
        print(f"  k={k} a={a} eps={eps:+.0e}: |dp|={d:.2e}")
        assert d <= 1e-5

print("\nexact module OK")
