"""Freeze high-precision oracle values for the test suites."""
import sys
sys.path.insert(0, "tests")
import numpy as np
from mpmath import mp
from oracles import mp_transition_prob, mp_alpha_beta, mp_cgf, mp_cgf_derivative

mp.dps = 60

pmf_cases = [
    (2, 0.3, 1, (1.2, 0.8)),
    (7, 1.0, 3, (7.0, 5.0)),
    (40, 1.0, 10, (7.0, 5.0)),
    (120, 1.0, 20, (7.0, 5.0)),
    (3, 0.5, 4, (2.0, 2.0)),
    (5, 2.0, 8, (0.0, 3.0)),
    (9, 0.7, 2, (3.0, 0.0)),
    (1, 1.0, 20, (7.0, 5.0)),
]
print("# log pmf values")
for k, t, a, r in pmf_cases:
    v = mp.log(mp_transition_prob(k, t, a, r))
    print(f"    (({k}, {t}, {a}, {r}), {mp.nstr(v, 17)}),")

print("# alpha,beta at (7,5), t=1")
al, be = mp_alpha_beta(1.0, (7.0, 5.0))
print("alpha:", mp.nstr(al, 17), "beta:", mp.nstr(be, 17))

print("# cgf points")
for x, t, a, r in [(0.1, 1.0, 10, (7.0, 5.0)), (-0.5, 0.5, 4, (2.0, 2.0))]:
    K = mp_cgf(x, t, a, r)
    K1 = mp_cgf_derivative(x, t, a, r, 1)
    K2 = mp_cgf_derivative(x, t, a, r, 2)
    print(f"    (({x}, {t}, {a}, {r}), {mp.nstr(K, 17)}, {mp.nstr(K1, 17)}, {mp.nstr(K2, 17)}),")

# conditional-SPA mass: sum over k>=1 of p~cond/(1-p0), how close to 1?
from bdrates.exact import geom_params, truncation_limit
from bdrates.saddlepoint import spa_pmf_conditional
from bdrates.types import Rates
import math
for a in (5, 10, 20):
    rates = Rates(7.0, 5.0)
    g = geom_params(1.0, rates)
    p0 = math.exp(a * g.log_alpha)
    K = truncation_limit(1.0, a, rates)
    s = sum(spa_pmf_conditional(k, 1.0, a, rates) for k in range(1, K + 1))
    print(f"a={a}: sum cond/(1-p0) = {s/(1-p0):.10f}  (dev {abs(s/(1-p0)-1):.3e})")
