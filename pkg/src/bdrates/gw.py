"""Moment estimators built on the process embedded at equal time steps.

With a common inter-observation gap dt, the observed counts form a
branching process in discrete generations whose offspring mean and
variance are m = exp(omega*dt) and the horizon-dt variance of a single
ancestor. Pooled ratio estimators of (m, sigma2) invert in closed form to
the birth and death rates:

    lam = log(m)/(2 dt) * (sigma2/(m(m-1)) + 1)
    mu  = log(m)/(2 dt) * (sigma2/(m(m-1)) - 1)

and lam = mu = sigma2/(2 dt) in the critical case. The growth rate
estimate log(m_hat)/dt depends on m_hat alone and converges at the
faster sqrt(sum of source counts) rate, while (lam_hat, mu_hat) are
sqrt(n)-normal with a rank-1 covariance: their standard errors coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError, DomainError
from .types import Panel, Rates

__all__ = [
    "EPS_NEAR_CRITICAL",
    "GwMoments",
    "GwEstimate",
    "gw_moments",
    "gw_invert",
    "gw_estimate",
    "gw_standard_errors",
]

# Half-width of the |m_hat - 1| band treated as critical: inside it the
# generic inversion would divide by m_hat*(m_hat - 1).
EPS_NEAR_CRITICAL = 1e-6

REGIME_OK = "supercritical_ok"
REGIME_NEAR_CRITICAL = "near_critical_warning"


@dataclass(frozen=True)
class GwMoments:
    """Pooled offspring mean and variance of the embedded process.

    n_terms counts the transitions with a positive source count: those
    are the generations that carry information (a 0 source forces a 0
    target, and the 0/0 := 1 convention makes such terms vanish), and it
    equals the per-trajectory stopping index summed over the panel.
    """

    m_hat: float
    sigma2_hat: float
    delta_t: float
    n_terms: int
    m_traj: int


@dataclass(frozen=True)
class GwEstimate:
    """Rates recovered from the embedded-process moments, with plug-in
    standard errors; se_lambda == se_mu always (rank-1 asymptotic
    covariance). regime flags panels whose m_hat is too close to 1 for
    the supercritical limit theory; clamped flags a negative rate that
    was pulled back to the boundary of the parameter space."""

    rates: Rates
    omega_hat: float
    se_lambda: float
    se_mu: float
    se_omega: float
    regime: str
    clamped: bool


def gw_moments(panel: Panel) -> GwMoments:
    """Pooled moment estimators over all trajectories and generations.

    m_hat is the ratio of summed targets to summed sources; sigma2_hat
    averages the squared standardized one-step fluctuations around m_hat.
    Requires equal spacing throughout the panel.
    """
    if not panel.equal_spacing():
        raise DataError(
            "panel is not equally spaced; the embedded-process estimator "
            "does not apply (use the quasi-likelihood estimator instead)"
        )
    delta_t = panel.common_gap()
    num = 0.0
    den = 0.0
    n_terms = 0
    for tr in panel:
        counts = tr.counts
        for j in range(1, len(counts)):
            src = counts[j - 1]
            if src == 0:
                continue  # absorbed; 0/0 := 1 makes the term vanish
            num += counts[j]
            den += src
            n_terms += 1
    if den <= 0.0 or n_terms == 0:
        raise DataError("panel has no transitions with a positive source count")
    m_hat = num / den
    acc = 0.0
    for tr in panel:
        counts = tr.counts
        for j in range(1, len(counts)):
            src = counts[j - 1]
            if src == 0:
                continue
            acc += src * (counts[j] / src - m_hat) ** 2
    return GwMoments(m_hat, acc / n_terms, delta_t, n_terms, len(panel))


def gw_invert(moments: GwMoments) -> Rates:
    """Closed-form inversion of (m_hat, sigma2_hat) to the rate pair.

    Near-critical m_hat maps to the lam == mu limit. A negative rate
    (possible in small samples when sigma2_hat is small) is clamped to
    the boundary in the way that preserves the growth-rate estimate:
    the clamped rate becomes 0 and the other |log(m_hat)|/delta_t.
    """
    rates, _ = _invert_flagged(moments)
    return rates


def _invert_flagged(moments: GwMoments) -> tuple[Rates, bool]:
    m, s2, dt = moments.m_hat, moments.sigma2_hat, moments.delta_t
    if m <= 0.0:
        raise DomainError(f"offspring mean estimate must be positive, got {m}")
    if abs(m - 1.0) <= EPS_NEAR_CRITICAL:
        lam = s2 / (2.0 * dt)
        if lam <= 0.0:
            raise DomainError(
                "panel shows no one-step variation: both rates inverted to 0"
            )
        return Rates(lam, lam), False
    half_omega = math.log(m) / (2.0 * dt)
    ratio = s2 / (m * (m - 1.0))
    lam = half_omega * (ratio + 1.0)
    mu = half_omega * (ratio - 1.0)
    if mu < 0.0:
        return Rates(2.0 * half_omega, 0.0), True
    if lam < 0.0:
        return Rates(0.0, -2.0 * half_omega), True
    return Rates(lam, mu), False


def gw_standard_errors(moments: GwMoments, panel: Panel) -> tuple[float, float, float]:
    """Plug-in asymptotic standard errors (se_lambda, se_mu, se_omega).

    The rate pair has equal standard errors
    |log m| * sigma2 / sqrt(2 dt^2 m^2 (m-1)^2 n_terms); the growth rate
    uses the observed-information normalization sigma / (m dt sqrt(S))
    with S the summed source counts. Outside the supercritical regime
    the rate-pair formula degenerates (division by m-1) and the caller
    is expected to flag the regime; the values are still returned.
    """
    m, s2, dt = moments.m_hat, moments.sigma2_hat, moments.delta_t
    src_total = 0.0
    for tr in panel:
        counts = tr.counts
        for j in range(1, len(counts)):
            if counts[j - 1] > 0:
                src_total += counts[j - 1]
    gap = abs(m - 1.0)
    if gap > 0.0 and m > 0.0:
        se_rate = abs(math.log(m)) * s2 / math.sqrt(
            2.0 * dt * dt * m * m * gap * gap * moments.n_terms
        )
    else:
        se_rate = math.inf
    se_omega = (
        math.sqrt(s2) / (m * dt * math.sqrt(src_total)) if src_total > 0.0 else math.inf
    )
    return se_rate, se_rate, se_omega


def gw_estimate(panel: Panel) -> GwEstimate:
    """Full pipeline: pooled moments, closed-form inversion, plug-in
    standard errors, and the regime/clamp flags."""
    moments = gw_moments(panel)
    rates, clamped = _invert_flagged(moments)
    omega_hat = math.log(moments.m_hat) / moments.delta_t
    se_l, se_m, se_w = gw_standard_errors(moments, panel)
    regime = (
        REGIME_OK if moments.m_hat > 1.0 + EPS_NEAR_CRITICAL else REGIME_NEAR_CRITICAL
    )
    return GwEstimate(rates, omega_hat, se_l, se_m, se_w, regime, clamped)
