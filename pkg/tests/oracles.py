"""Independent high-precision references used to pin expected values.

Everything here is deliberately written against the raw formulas with
mpmath arbitrary-precision arithmetic and without reusing any package
code path, so package results can be checked against a genuinely
separate evaluation.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 60


def mp_alpha_beta(t, lam, mu):
    """(alpha, beta) at horizon t in arbitrary precision."""
    t, lam, mu = mp.mpf(t), mp.mpf(lam), mp.mpf(mu)
    if lam == mu:
        u = lam * t
        a = u / (1 + u)
        return a, a
    w = lam - mu
    ewt = mp.e ** (w * t)
    alpha = mu * (ewt - 1) / (lam * ewt - mu)
    beta = lam * (ewt - 1) / (lam * ewt - mu)
    return alpha, beta


def mp_transition_prob(k, t, a, lam, mu):
    """P(Z(t) = k | Z(0) = a) in arbitrary precision."""
    k, a = int(k), int(a)
    if a == 0:
        return mp.mpf(1) if k == 0 else mp.mpf(0)
    alpha, beta = mp_alpha_beta(t, lam, mu)
    if k == 0:
        return alpha ** a
    total = mp.mpf(0)
    for j in range(max(0, a - k), a):
        total += (
            mp.binomial(a, j)
            * mp.binomial(k - 1, a - j - 1)
            * alpha ** j
            * ((1 - alpha) * (1 - beta)) ** (a - j)
            * beta ** (k - a + j)
        )
    return total


def mp_pgf(s, t, a, lam, mu):
    """E[s^Z(t)] from a ancestors in arbitrary precision."""
    s = mp.mpf(s)
    alpha, beta = mp_alpha_beta(t, lam, mu)
    one = alpha + (1 - alpha) * (1 - beta) * s / (1 - beta * s)
    return one ** int(a)


def mp_cgf(x, t, a, lam, mu):
    """Cumulant generating function a*log f(e^x, t) in arbitrary precision."""
    return int(a) * mp.log(mp_pgf(mp.e ** mp.mpf(x), t, 1, lam, mu))


def mp_cgf_derivative(x, t, a, lam, mu, order=1):
    """Derivatives of the cumulant generating function in x, via mpmath
    high-order numerical differentiation at high precision."""
    f = lambda y: mp_cgf(y, t, a, lam, mu)
    return mp.diff(f, mp.mpf(x), order)
