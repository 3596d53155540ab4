"""Mode-pairing key-rate pipeline.

Clicked rounds are paired greedily within a maximal interval; pairs
where vacuum meets a coherent pulse on both sides generate key, pairs
with matched decoy intensities feed the phase-error test.  The loose
test-window bound is tightened with the sinc inversion exactly as in
the send-or-not-send engine, with the window half-width equal to the
full pairing tolerance Delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel as channel_mod
from . import kernels
from .decoy import (DecoyObservations, chernoff_lower, chernoff_upper,
                    eph_precise_mp, s1_lower_bound)
from .params import ChannelParams, MpParams
from .phase_error import binary_entropy, privacy_factor
from .sns import KeyRateResult, _finite_gain

__all__ = [
    "PairingOutcome",
    "pairing_rate",
    "simulate_pairing",
    "classify_pairs",
    "key_rate_mp",
    "max_distance_mp",
]


@dataclass(frozen=True)
class PairingOutcome:
    """Pair formation rate and the composition of formed pairs."""

    pairs_per_round: float
    z_pair_fraction: float
    x_pair_fraction: float
    discard_fraction: float


def pairing_rate(q: float, interval: int) -> float:
    """Expected pairs per round of the greedy pairing renewal process.

    A clicked round is held; the next click pairs with it when it arrives
    within ``interval`` rounds, otherwise it replaces the held click.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"click probability must lie in (0, 1], got {q}")
    if interval < 1:
        raise ValueError("interval must be at least 1")
    s = 1.0 - (1.0 - q) ** interval
    w = s / q  # mean truncated inter-click wait
    return s / (1.0 / q + w)


def simulate_pairing(q: float, interval: int, n_rounds: int,
                     rng: np.random.Generator):
    """Monte Carlo of the explicit pairing process; returns pair count."""
    clicks = np.flatnonzero(rng.random(n_rounds) < q).astype(np.int64)
    first, _second = kernels.pair_clicks(clicks, interval)
    return len(first)


def _pattern_tables(protocol: MpParams, click_probs):
    intensities = (protocol.mu, protocol.nu, 0.0)
    probs = protocol.intensity_probs
    q = np.array([[click_probs[(ka, kb)] for kb in intensities] for ka in intensities])
    p = np.outer(probs, probs)
    joint = p * q
    total = joint.sum()
    return intensities, joint / total, total


def classify_pairs(protocol: MpParams, chan: ChannelParams) -> PairingOutcome:
    """Composition of formed pairs by exhaustive intensity enumeration.

    A Z pair has a vacuum-with-coherent pattern on both sides; an X pair
    has all four pulses at the decoy intensity nu.
    """
    stats = channel_mod.mp_statistics(protocol, chan)
    intensities, cond, _ = _pattern_tables(protocol, stats.extras["click_probs"])
    n = len(intensities)
    z_frac = 0.0
    x_frac = 0.0
    for a1 in range(n):
        for b1 in range(n):
            w1 = cond[a1, b1]
            for a2 in range(n):
                for b2 in range(n):
                    w = w1 * cond[a2, b2]
                    ka1, ka2 = intensities[a1], intensities[a2]
                    kb1, kb2 = intensities[b1], intensities[b2]
                    z_a = (ka1 == 0.0) != (ka2 == 0.0)
                    z_b = (kb1 == 0.0) != (kb2 == 0.0)
                    if z_a and z_b:
                        z_frac += w
                    if (ka1 == ka2 == protocol.nu) and (kb1 == kb2 == protocol.nu):
                        x_frac += w
    r_p = pairing_rate(stats.q_z, protocol.max_pair_interval)
    return PairingOutcome(
        pairs_per_round=r_p,
        z_pair_fraction=z_frac,
        x_pair_fraction=x_frac,
        discard_fraction=1.0 - z_frac - x_frac,
    )


def _single_photon_pair_fraction(protocol: MpParams, stats, s1: float) -> float:
    """Product-form fraction of Z pairs carrying one photon per side."""
    p_mu, p_nu, _ = protocol.intensity_probs
    w = p_mu + p_nu
    if w <= 0:
        return 0.0
    intensities = {protocol.mu: p_mu / w, protocol.nu: p_nu / w}
    click_probs = stats.extras["click_probs"]
    probs = dict(zip((protocol.mu, protocol.nu, 0.0), protocol.intensity_probs))

    def side_fraction():
        num = 0.0
        den = 0.0
        for k, pk in intensities.items():
            # partner intensity averaged click probability for a round
            # where this side sends k
            q_row = sum(probs[kb] * click_probs[(k, kb)] for kb in probs)
            num += pk * k * math.exp(-k) * s1
            den += pk * q_row
        return min(1.0, num / den) if den > 0 else 0.0

    f = side_fraction()
    return f * f


def key_rate_mp(protocol: MpParams, chan: ChannelParams, mode: str = "precise") -> KeyRateResult:
    """Per-round key rate of the modeled mode-pairing protocol."""
    if mode not in ("loose", "precise"):
        raise ValueError(f"mode must be 'loose' or 'precise', got {mode!r}")
    fin = protocol.finite
    stats = channel_mod.mp_statistics(protocol, chan)
    outcome = classify_pairs(protocol, chan)
    n_total = fin.total_rounds
    eps = fin.epsilon
    eps_budget = 0.0
    p_mu, p_nu, p_o = protocol.intensity_probs

    def spend(val):
        nonlocal eps_budget
        eps_budget += eps
        return val

    # per-round one-sided decoy bound
    n_nu = 2.0 * n_total * p_nu * p_o
    n_mu = 2.0 * n_total * p_mu * p_o
    n_00 = n_total * p_o * p_o
    gain_nu_lo = spend(_finite_gain(stats.decoy_gains[(protocol.nu, 0.0)],
                                    n_nu, eps, "lower", fin.enabled))
    gain_mu_hi = spend(_finite_gain(stats.decoy_gains[(protocol.mu, 0.0)],
                                    n_mu, eps, "upper", fin.enabled))
    s00_hi = spend(_finite_gain(stats.s00, n_00, eps, "upper", fin.enabled))
    obs = DecoyObservations(protocol.nu, protocol.mu, gain_nu_lo, gain_mu_hi, s00_hi)
    s1, s1_clamped = s1_lower_bound(obs, with_flag=True)

    pairs_total = n_total * outcome.pairs_per_round
    n_z = pairs_total * outcome.z_pair_fraction
    # phase window acceptance: |delta_a - delta_b| within Delta of 0 or pi
    accept = min(1.0, 2.0 * protocol.slice_width / math.pi)
    n_x = pairs_total * outcome.x_pair_fraction * accept

    flags = {"s1_clamped": s1_clamped}
    # stats.t_delta is the window-averaged error ratio of accepted test
    # pairs; upper-bound the error count and lower-bound the pair count.
    if n_x <= 0.0:
        t_x_hi = 0.5
        e_loose = e_used = 0.5
        flags["loose_clamped"] = True
    else:
        t_x_hi = spend(_finite_gain(stats.t_delta, n_x, eps, "upper",
                                    fin.enabled))
        e_loose = t_x_hi
        flags["loose_clamped"] = e_loose > 1.0
        e_loose = min(e_loose, 1.0)
        if mode == "precise":
            e_used, pr_cl = eph_precise_mp(e_loose, protocol.slice_width,
                                           with_flag=True)
            flags["precise_clamped"] = pr_cl
        else:
            e_used = e_loose

    s1_pair = _single_photon_pair_fraction(protocol, stats, s1)
    n_key = n_z * s1_pair
    if fin.enabled:
        n_key = spend(chernoff_lower(n_key, eps))
    e_z = stats.e_z

    raw = (n_key * privacy_factor(e_used)
           - fin.ec_inefficiency * n_z * binary_entropy(e_z)) / n_total
    rate = max(raw, 0.0)

    audit = {
        "distance_km": chan.distance_km,
        "eta_arm": stats.extras["eta_arm"],
        "q_round": stats.q_z,
        "pairs_per_round": outcome.pairs_per_round,
        "z_pair_fraction": outcome.z_pair_fraction,
        "x_pair_fraction": outcome.x_pair_fraction,
        "s1_lower": s1,
        "s1_pair": s1_pair,
        "t_x": stats.t_delta,
        "t_x_upper": t_x_hi,
        "n_x": n_x,
        "e_ph_loose": e_loose,
        "e_ph_used": e_used,
        "n_key": n_key,
        "e_ph_key": e_used,
        "n_ec": n_z,
        "e_z_ec": e_z,
        "f_ec": fin.ec_inefficiency,
        "total_rounds": n_total,
        "epsilon_budget": eps_budget,
        "flags": flags,
        "raw_rate": raw,
    }
    return KeyRateResult(
        rate_per_round=rate, n_untagged=n_key, e_ph_used=e_used,
        e_z=e_z, mode=mode, audit=audit,
    )


def max_distance_mp(protocol: MpParams, chan_template: ChannelParams,
                    mode: str = "precise", d_max: float = 600.0,
                    resolution: float = 0.1, rate_fn=None):
    """Largest distance with a positive rate; see sns.max_distance."""
    from .sns import max_distance as _generic

    if rate_fn is None:
        def rate_fn(d):
            return key_rate_mp(protocol, chan_template.at_distance(d),
                               mode).rate_per_round

    return _generic(None, chan_template, mode, d_max=d_max,
                    resolution=resolution, rate_fn=rate_fn)
