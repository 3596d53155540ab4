"""Linear-loss interference model producing simulated click statistics.

Both parties' pulses travel half the total distance to the middle node,
interfere on a balanced beamsplitter and hit two threshold detectors L
and R.  An effective round is one where exactly one detector clicks;
misalignment swaps the registered detector label with a fixed
probability.  All statistics are exact expectations (no sampling):
phase averages are evaluated by Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .params import ChannelParams, MpParams, SnsParams

__all__ = [
    "ClickStatistics",
    "arm_transmittance",
    "interference_click_probs",
    "exactly_one_click",
    "phase_average",
    "sns_statistics",
    "mp_statistics",
]


@dataclass(frozen=True)
class ClickStatistics:
    """Modeled observables consumed by the decoy and key-rate layers.

    For the send-or-not-send protocol ``q_z``/``e_z`` are the code-mode
    effective-click rate and bit error rate; for mode-pairing ``q_z`` is
    the average per-round effective click probability and ``e_z`` the
    paired-bit error rate.  ``t_delta`` is the error-click ratio among
    phase-postselected test instances, ``gain_delta`` their total
    effective-click ratio, and ``n_l``/``n_r`` the per-instance expected
    port rates.  ``decoy_gains`` maps intensity pairs to gains.
    """

    q_z: float
    e_z: float
    decoy_gains: dict
    t_delta: float
    gain_delta: float
    s00: float
    n_l: float
    n_r: float
    extras: dict = field(default_factory=dict)


def arm_transmittance(params: ChannelParams) -> float:
    """Efficiency of one arm: detector efficiency times half-link loss."""
    fiber = 10.0 ** (-params.loss_coeff_db_per_km * (params.distance_km / 2.0) / 10.0)
    return params.detector_efficiency * fiber


def interference_click_probs(mu_a: float, mu_b: float, theta: float,
                             eta: float, p_dark: float):
    """Per-detector click probabilities for two interfering coherent pulses."""
    if mu_a < 0 or mu_b < 0:
        raise ValueError("intensities must be nonnegative")
    cross = 2.0 * math.sqrt(mu_a * mu_b) * math.cos(theta)
    i_l = eta * (mu_a + mu_b + cross) / 2.0
    i_r = eta * (mu_a + mu_b - cross) / 2.0
    p_l = 1.0 - (1.0 - p_dark) * math.exp(-i_l)
    p_r = 1.0 - (1.0 - p_dark) * math.exp(-i_r)
    return p_l, p_r


def exactly_one_click(p_l: float, p_r: float):
    """(L-only, R-only) probabilities under the single-click convention."""
    return p_l * (1.0 - p_r), p_r * (1.0 - p_l)


@lru_cache(maxsize=None)
def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def phase_average(f, lo: float, hi: float, n: int = 64):
    """Gauss-Legendre average of ``f`` over [lo, hi]."""
    if hi <= lo:
        raise ValueError("need hi > lo")
    x, w = _gl_nodes(n)
    mid, half = (hi + lo) / 2.0, (hi - lo) / 2.0
    vals = [f(mid + half * xi) for xi in x]
    return float(np.dot(w, np.asarray(vals, dtype=float)) / 2.0)


def _one_click_probs_at(mu_a, mu_b, theta, eta, p_dark, e_mis):
    """Registered (L-only, R-only) probabilities including label swaps."""
    p_l, p_r = interference_click_probs(mu_a, mu_b, theta, eta, p_dark)
    only_l, only_r = exactly_one_click(p_l, p_r)
    reg_l = (1.0 - e_mis) * only_l + e_mis * only_r
    reg_r = (1.0 - e_mis) * only_r + e_mis * only_l
    return reg_l, reg_r


def _avg_one_click(mu_a, mu_b, eta, p_dark, n=64):
    """Effective-click probability averaged over a uniform relative phase."""
    if mu_a == 0.0 or mu_b == 0.0:
        reg_l, reg_r = _one_click_probs_at(mu_a, mu_b, 0.0, eta, p_dark, 0.0)
        return reg_l + reg_r
    return phase_average(
        lambda t: sum(_one_click_probs_at(mu_a, mu_b, t, eta, p_dark, 0.0)),
        0.0, math.pi, n)  # integrand depends on cos(theta) only


def sns_statistics(protocol: SnsParams, channel: ChannelParams) -> ClickStatistics:
    """Exact expectations for one send-or-not-send signal/decoy round."""
    eta = arm_transmittance(channel)
    p_d = channel.dark_count
    p = protocol.send_prob
    mu_z = protocol.signal_intensity
    mu1, nu = protocol.mu1, protocol.nu
    e_mis = channel.misalign_x

    # Code mode: exactly-one-send rounds carry agreeing bits; both-send and
    # none-send rounds that click are bit errors.
    q_single = _avg_one_click(mu_z, 0.0, eta, p_d)
    q_both = _avg_one_click(mu_z, mu_z, eta, p_d)
    s00 = 2.0 * p_d * (1.0 - p_d)
    w_single = 2.0 * p * (1.0 - p)
    w_both = p * p
    w_none = (1.0 - p) ** 2
    q_z = w_single * q_single + w_both * q_both + w_none * s00
    e_z = (w_both * q_both + w_none * s00) / q_z if q_z > 0 else 0.0

    # Decoy mode gains for the intensity pairs the decoy bound consumes.
    pairs = [(nu, 0.0), (mu1, 0.0), (0.0, nu), (0.0, mu1), (0.0, 0.0), (mu1, mu1)]
    gains = {pr: _avg_one_click(pr[0], pr[1], eta, p_d) for pr in pairs}

    # Phase-postselected mu1-mu1 instances: window |theta_A - theta_B| <=
    # Delta/2 around 0, where L is the correct port.  (The anti-phase
    # window behaves identically by symmetry.)
    half = protocol.slice_full_width / 2.0
    n_l = phase_average(
        lambda d: _one_click_probs_at(mu1, mu1, d, eta, p_d, e_mis)[0], -half, half)
    n_r = phase_average(
        lambda d: _one_click_probs_at(mu1, mu1, d, eta, p_d, e_mis)[1], -half, half)
    t_delta = n_r
    gain_delta = n_l + n_r

    return ClickStatistics(
        q_z=q_z, e_z=e_z, decoy_gains=gains, t_delta=t_delta,
        gain_delta=gain_delta, s00=s00, n_l=n_l, n_r=n_r,
        extras={
            "eta_arm": eta,
            "q_single": q_single,
            "q_both": q_both,
            "branch_weights": (w_single, w_both, w_none),
        },
    )


def mp_statistics(protocol: MpParams, channel: ChannelParams) -> ClickStatistics:
    """Exact expectations for one mode-pairing round and for formed pairs."""
    eta = arm_transmittance(channel)
    p_d = channel.dark_count
    mu, nu = protocol.mu, protocol.nu
    p_mu, p_nu, p_o = protocol.intensity_probs
    e_x = channel.misalign_x

    intensities = (mu, nu, 0.0)
    probs = (p_mu, p_nu, p_o)
    click_probs = {}
    q_bar = 0.0
    for ka, pa in zip(intensities, probs):
        for kb, pb in zip(intensities, probs):
            q = _avg_one_click(ka, kb, eta, p_d)
            click_probs[(ka, kb)] = q
            q_bar += pa * pb * q
    s00 = click_probs[(0.0, 0.0)]

    # One-sided gains for the per-round decoy bound.
    gains = {
        (nu, 0.0): click_probs[(nu, 0.0)],
        (mu, 0.0): click_probs[(mu, 0.0)],
        (0.0, 0.0): s00,
    }

    # Z-pair bit error: misaligned assignment plus dark-caused clicks that
    # carry no phase information (half of them land wrong).
    dark_fraction = min(1.0, 2.0 * p_d * (1.0 - p_d) / q_bar) if q_bar > 0 else 1.0
    e_z = channel.misalign_z * (1.0 - dark_fraction) + 0.5 * dark_fraction

    # X pairs: both rounds nu-nu, postselected on the two rounds' relative
    # phases differing by at most slice_width.  The error ratio refers to
    # the single-photon-pair component: a wrong pair parity comes from
    # misalignment, from dark-caused clicks (phase-blind), or from the
    # intrinsic (1 - cos delta)/2 penalty of the phase offset inside the
    # window.
    delta_w = protocol.slice_width
    q_nn = click_probs[(nu, nu)]
    dark_round = min(1.0, s00 / q_nn) if q_nn > 0 else 1.0
    pair_dark = 1.0 - (1.0 - dark_round) ** 2
    e0 = e_x * (1.0 - pair_dark) + 0.5 * pair_dark

    def pair_error(delta):
        c = math.cos(delta)
        return e0 * c + (1.0 - c) / 2.0

    t_delta = phase_average(pair_error, -delta_w, delta_w)
    pair_gain = q_nn * q_nn
    n_l = n_r = pair_gain / 2.0

    return ClickStatistics(
        q_z=q_bar, e_z=e_z, decoy_gains=gains, t_delta=t_delta,
        gain_delta=pair_gain, s00=s00, n_l=n_l, n_r=n_r,
        extras={
            "eta_arm": eta,
            "click_probs": click_probs,
            "q_nu_nu": q_nn,
            "dark_fraction": dark_fraction,
        },
    )
