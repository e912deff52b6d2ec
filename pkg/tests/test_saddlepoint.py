import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from bdrates.errors import DomainError
from bdrates.exact import (
    exact_loglik,
    geom_params,
    log_transition_prob,
    mean,
    truncation_limit,
    variance,
)
from bdrates.saddlepoint import (
    cgf_eval,
    high_mass_region,
    radius,
    solve_saddlepoint,
    spa_loglik,
    spa_pmf,
    spa_pmf_conditional,
    spa_pmf_normalized,
)
from bdrates.types import Panel, Rates, Trajectory

R75 = Rates(7.0, 5.0)

# Frozen against tests/oracles.py (mpmath at 60 digits):
# (x, t, a, lam, mu, K, K', K'')
ORACLE_CGF = [
    (0.03, 1.0, 10, 7.0, 5.0, 5.3383327061468875, 438.76961294553951, 44578.229463650518),
    (-0.5, 0.5, 4, 2.0, 2.0, -1.3271862630047449, 1.7410663935743354, 2.4988944402828211),
]


@pytest.mark.parametrize("x,t,a,lam,mu,K,K1,K2", ORACLE_CGF)
def test_cgf_matches_high_precision_oracle(x, t, a, lam, mu, K, K1, K2):
    pt = cgf_eval(x, t, a, Rates(lam, mu))
    assert pt.value == pytest.approx(K, rel=1e-12)
    assert pt.d1 == pytest.approx(K1, rel=1e-9)
    assert pt.d2 == pytest.approx(K2, rel=1e-9)


def test_cgf_identities_at_zero():
    for r, t, a in [(R75, 1.0, 10), (Rates(2.0, 2.0), 0.5, 4), (Rates(0.5, 2.0), 1.2, 7)]:
        pt = cgf_eval(0.0, t, a, r)
        assert pt.value == pytest.approx(0.0, abs=1e-12)
        assert pt.d1 == pytest.approx(mean(t, a, r), rel=1e-12)
        assert pt.d2 == pytest.approx(variance(t, a, r), rel=1e-10)


def test_cgf_rejects_outside_domain():
    lr = math.log(radius(1.0, R75))
    with pytest.raises(DomainError):
        cgf_eval(lr + 0.01, 1.0, 10, R75)


def test_saddlepoint_critical_mean_case():
    # lam = mu means m(t) = 1, so k = a sits exactly at the mean: s~ = 1
    sol = solve_saddlepoint(4, 0.5, 4, Rates(2.0, 2.0))
    assert sol.s_tilde == pytest.approx(1.0, abs=1e-12)
    assert abs(sol.residual) <= 1e-10 * 4


def test_saddlepoint_noncritical_mean_case():
    # rates chosen so exp(omega*t) = 2 up to float rounding: k = 2a is the mean
    r = Rates(5.0 + math.log(2.0), 5.0)
    sol = solve_saddlepoint(20, 1.0, 10, r)
    assert sol.s_tilde == pytest.approx(1.0, abs=1e-9)


def test_saddlepoint_residual_grid():
    for a in (1, 5, 20):
        for k in (1, 2, 5, 17, 40, 100, 400):
            sol = solve_saddlepoint(k, 1.0, a, R75)
            assert abs(sol.residual) <= 1e-10 * max(1, k)


def test_saddlepoint_agrees_with_bisection():
    # independent root find of K'(x) = k over (0, R)
    k, a, t = 40, 10, 1.0
    sol = solve_saddlepoint(k, t, a, R75)
    lr = math.log(radius(t, R75))

    def fun(x):
        return cgf_eval(x, t, a, R75).d1 - k

    root = brentq(fun, -30.0, lr * (1 - 1e-10), xtol=1e-15, rtol=8.9e-16)
    assert sol.x_tilde == pytest.approx(root, rel=1e-10, abs=1e-12)
    assert abs(sol.residual) <= 1e-10 * k


def test_saddlepoint_monotone_in_k():
    xs = [solve_saddlepoint(k, 1.0, 10, R75).x_tilde for k in range(1, 220, 7)]
    assert all(b > a for a, b in zip(xs, xs[1:]))


def test_saddlepoint_rejects_bad_targets():
    with pytest.raises(DomainError):
        solve_saddlepoint(0, 1.0, 5, R75)
    with pytest.raises(DomainError):
        solve_saddlepoint(3, 1.0, 0, R75)


def test_spa_pmf_k0_is_exact_passthrough():
    g = geom_params(1.0, R75)
    for a in (1, 5, 20):
        assert spa_pmf(0, 1.0, a, R75) == pytest.approx(
            math.exp(a * g.log_alpha), rel=1e-15
        )
        assert spa_pmf_normalized(0, 1.0, a, R75) == spa_pmf(0, 1.0, a, R75)
        assert spa_pmf_conditional(0, 1.0, a, R75) == spa_pmf(0, 1.0, a, R75)


def _exact_pmf_row(t, a, r, kmax):
    g = geom_params(t, r)
    return np.array([math.exp(log_transition_prob(k, t, a, r)) for k in range(1, kmax + 1)])


def test_spa_error_shrinks_with_ancestors():
    # max relative error over the central-mass window, a = 5 vs a = 20
    errs = {}
    for a in (5, 20):
        k_lo, k_hi = high_mass_region(1.0, a, R75)
        ks = range(k_lo, k_hi + 1)
        p = [math.exp(log_transition_prob(k, 1.0, a, R75)) for k in ks]
        ptil = [spa_pmf(k, 1.0, a, R75) for k in ks]
        errs[a] = max(abs(q / e - 1.0) for q, e in zip(ptil, p))
    assert errs[20] < errs[5]
    assert errs[20] <= 0.04


def test_high_mass_region_is_central():
    k_lo, k_hi = high_mass_region(1.0, 20, R75)
    m = mean(1.0, 20, R75)
    assert 1 < k_lo < m < k_hi
    with pytest.raises(DomainError):
        high_mass_region(1.0, 20, R75, lo=0.9, hi=0.1)


def test_spa_normalized_sums_to_one():
    a, t = 10, 1.0
    kmax = truncation_limit(t, a, R75)
    total = spa_pmf_normalized(0, t, a, R75) + sum(
        spa_pmf_normalized(k, t, a, R75) for k in range(1, kmax + 1)
    )
    assert abs(total - 1.0) < 1e-8


def test_spa_normalized_beats_plain_in_sup_norm():
    a, t = 10, 1.0
    kmax = truncation_limit(t, a, R75)
    p = _exact_pmf_row(t, a, R75, kmax)
    plain = np.array([spa_pmf(k, t, a, R75) for k in range(1, kmax + 1)])
    norm = np.array([spa_pmf_normalized(k, t, a, R75) for k in range(1, kmax + 1)])
    assert np.max(np.abs(norm - p)) < np.max(np.abs(plain - p))


def test_spa_conditional_small_k_artifact_reduction():
    # near the support boundary the conditional variant must do strictly better
    a, t = 10, 1.0
    ks = range(1, 6)
    p = [math.exp(log_transition_prob(k, t, a, R75)) for k in ks]
    plain = [abs(spa_pmf(k, t, a, R75) - q) for k, q in zip(ks, p)]
    cond = [abs(spa_pmf_conditional(k, t, a, R75) - q) for k, q in zip(ks, p)]
    assert max(cond) < max(plain)


def test_spa_conditional_agrees_with_plain_for_large_a():
    for k in (300, 370, 450):
        pl = spa_pmf(k, 1.0, 50, R75)
        co = spa_pmf_conditional(k, 1.0, 50, R75)
        assert co == pytest.approx(pl, rel=1e-3)


def test_spa_conditional_k1_is_exact_boundary_value():
    # k=1 is the conditional support minimum: no finite saddlepoint exists,
    # the exact single-term value is used
    for a in (2, 10, 25):
        assert spa_pmf_conditional(1, 1.0, a, R75) == pytest.approx(
            math.exp(log_transition_prob(1, 1.0, a, R75)), rel=1e-15
        )


def test_spa_conditional_renormalizes_cleanly():
    a, t = 10, 1.0
    kmax = truncation_limit(t, a, R75)
    vals = np.array([spa_pmf_conditional(k, t, a, R75) for k in range(1, kmax + 1)])
    assert np.all(np.isfinite(vals)) and np.all(vals > 0.0)
    q = vals / vals.sum()
    assert abs(q.sum() - 1.0) < 1e-6


def test_spa_loglik_additivity():
    r = Rates(1.8, 1.2)
    tr = Trajectory((0.0, 0.5, 1.0, 2.0), (3, 5, 2, 0))
    panel = Panel((tr,))
    manual = (
        math.log(spa_pmf(5, 0.5, 3, r))
        + math.log(spa_pmf(2, 0.5, 5, r))
        + math.log(spa_pmf(0, 1.0, 2, r))
    )
    assert spa_loglik(panel, r) == pytest.approx(manual, rel=1e-12)
    manual_c = (
        math.log(spa_pmf_conditional(5, 0.5, 3, r))
        + math.log(spa_pmf_conditional(2, 0.5, 5, r))
        + math.log(spa_pmf_conditional(0, 1.0, 2, r))
    )
    assert spa_loglik(panel, r, variant="conditional") == pytest.approx(
        manual_c, rel=1e-12
    )


def test_spa_loglik_high_count_panel_is_sharp():
    r = Rates(1.8, 1.2)
    panel = Panel(
        (
            Trajectory((0.0, 0.5, 1.0, 1.5), (60, 75, 90, 110)),
            Trajectory((0.0, 0.5, 1.0), (55, 50, 71)),
        )
    )
    le = exact_loglik(panel, r)
    ls = spa_loglik(panel, r)
    assert abs(ls - le) / abs(le) < 1e-3


def test_spa_loglik_error_scales_inversely_with_counts():
    # |exact - spa| ~ C / (min source count); C should be stable across scales
    r = Rates(1.8, 1.2)
    consts = []
    for scale in (1, 4, 16):
        tr = Trajectory(
            (0.0, 0.5, 1.0, 1.5), (5 * scale, 7 * scale, 6 * scale, 9 * scale)
        )
        panel = Panel((tr,))
        d = abs(exact_loglik(panel, r) - spa_loglik(panel, r))
        consts.append(d * 5 * scale)
    assert max(consts) / min(consts) < 1.5


def test_spa_loglik_rejects_unknown_variant():
    panel = Panel((Trajectory((0.0, 1.0), (3, 4)),))
    with pytest.raises(DomainError):
        spa_loglik(panel, R75, variant="renormalized")


@settings(max_examples=40, deadline=None)
@given(
    lam=st.floats(0.2, 6.0),
    mu=st.floats(0.2, 6.0),
    t=st.floats(0.1, 1.5),
    a=st.integers(1, 15),
    k=st.integers(1, 120),
)
def test_property_residual_invariant(lam, mu, t, a, k):
    sol = solve_saddlepoint(k, t, a, Rates(lam, mu))
    assert abs(sol.residual) <= 1e-10 * max(1, k)
    assert sol.cgf.d2 > 0.0


@settings(max_examples=25, deadline=None)
@given(
    lam=st.floats(0.2, 6.0),
    mu=st.floats(0.2, 6.0),
    t=st.floats(0.1, 1.5),
    a=st.integers(1, 10),
    k=st.integers(1, 60),
)
def test_property_spa_positive_and_finite(lam, mu, t, a, k):
    v = spa_pmf(k, t, a, Rates(lam, mu))
    assert math.isfinite(v) and v >= 0.0
