"""Decoy-state bounds and Chernoff-style fluctuation bounds.

The two-decoy analytic bound lower-bounds the single-photon counting
rate from one-sided gains; the test-window error-click ratio is turned
into a loose window-averaged phase-error bound and then tightened with
the sinc inversion from :mod:`qkdrate.phase_error`.  Observed counts are
converted into expectation bounds with multiplicative Chernoff bounds
solved numerically, which stay valid at the extreme failure
probabilities used here (1e-20 and below).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .phase_error import precise_from_loose

__all__ = [
    "DecoyObservations",
    "s1_lower_bound",
    "eph_loose_sns",
    "eph_precise_sns",
    "eph_precise_mp",
    "chernoff_lower",
    "chernoff_upper",
]


@dataclass(frozen=True)
class DecoyObservations:
    """One-sided gains at vacuum and two decoy intensities nu < mu."""

    nu: float
    mu: float
    gain_nu: float
    gain_mu: float
    gain_vacuum: float

    def __post_init__(self):
        if not 0.0 < self.nu < self.mu:
            raise ValueError(f"need 0 < nu < mu, got nu={self.nu}, mu={self.mu}")
        for name in ("gain_nu", "gain_mu", "gain_vacuum"):
            g = getattr(self, name)
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {g}")


def s1_lower_bound(obs: DecoyObservations, with_flag: bool = False):
    """Analytic two-decoy lower bound on the single-photon counting rate.

    Negative values are clamped to 0; ``with_flag=True`` also reports
    whether clamping occurred.
    """
    nu, mu = obs.nu, obs.mu
    y0 = obs.gain_vacuum
    s1 = (mu / (mu * nu - nu * nu)) * (
        obs.gain_nu * math.exp(nu)
        - (nu * nu) / (mu * mu) * obs.gain_mu * math.exp(mu)
        - (mu * mu - nu * nu) / (mu * mu) * y0
    )
    clamped = s1 < 0.0
    s1 = max(s1, 0.0)
    if with_flag:
        return s1, clamped
    return s1


def eph_loose_sns(t_delta: float, s00: float, s1_lower: float, mu1: float,
                  with_flag: bool = False):
    """Loose window-averaged phase-error bound from test-window clicks.

    (T - e^{-2 mu1} S00 / 2) / (2 mu1 e^{-2 mu1} s1), clamped to [0, 1].
    """
    if mu1 <= 0:
        raise ValueError("mu1 must be positive")
    if s1_lower <= 0:
        raise ValueError("single-photon bound must be positive")
    att = math.exp(-2.0 * mu1)
    val = (t_delta - 0.5 * att * s00) / (2.0 * mu1 * att * s1_lower)
    clamped = val < 0.0 or val > 1.0
    val = min(max(val, 0.0), 1.0)
    if with_flag:
        return val, clamped
    return val


def eph_precise_sns(loose: float, full_width: float, with_flag: bool = False):
    """Tighten a loose bound for the |theta_A - theta_B| <= Delta/2 window."""
    return precise_from_loose(loose, full_width / 2.0, with_flag=with_flag)


def eph_precise_mp(loose: float, half_width: float, with_flag: bool = False):
    """Tighten a loose bound for the |delta_a - delta_b| <= Delta window."""
    return precise_from_loose(loose, half_width, with_flag=with_flag)


def _check_chernoff_args(observed, eps):
    if observed < 0:
        raise ValueError("observed count must be nonnegative")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"failure probability must lie in (0, 1), got {eps}")


def chernoff_lower(observed: float, eps: float) -> float:
    """Lower bound on the expectation behind an observed count.

    Solves x = E(1 + d) with exp(-E[(1+d)ln(1+d) - d]) = eps and returns
    E = x / (1 + d).
    """
    _check_chernoff_args(observed, eps)
    if observed == 0.0:
        return 0.0
    target = math.log(1.0 / eps)

    def g(d):
        # E[(1+d)ln(1+d) - d] with E = x/(1+d)
        return observed * ((1.0 + d) * math.log1p(d) - d) / (1.0 + d) - target

    if g(1e-12) > 0:
        return observed
    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            return 0.0
    d = brentq(g, 1e-12, hi, xtol=1e-15, rtol=1e-14)
    return observed / (1.0 + d)


def chernoff_upper(observed: float, eps: float) -> float:
    """Upper bound on the expectation behind an observed count.

    Solves x = E(1 - d) with exp(-E d^2 / 2) = eps and returns
    E = x / (1 - d); for an observation of zero returns ln(1/eps).
    """
    _check_chernoff_args(observed, eps)
    target = math.log(1.0 / eps)
    if observed == 0.0:
        return target

    # x d^2/(2(1-d)) = target is quadratic in d; the root in (0, 1) gives
    # E = x/(1-d) = (target + sqrt(target^2 + 2 target x))^2 / (2 target)
    s = math.sqrt(target * target + 2.0 * target * observed)
    return (target + s) ** 2 / (2.0 * target)
