"""Send-or-not-send key-rate pipeline.

Combines the channel statistics, the two-decoy bound, the window
correction of the phase error and an explicit odd-parity pairing
post-processing step into a per-round key rate.  ``mode`` selects
whether the window-averaged phase-error bound is used as-is ("loose")
or tightened by the sinc inversion ("precise").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import channel as channel_mod
from .decoy import (DecoyObservations, chernoff_lower, chernoff_upper,
                    eph_loose_sns, eph_precise_sns, s1_lower_bound)
from .params import ChannelParams, SnsParams
from .phase_error import binary_entropy, privacy_factor

__all__ = [
    "KeyRateResult",
    "untagged_fraction",
    "aopp_expectations",
    "sample_code_bits",
    "aopp_simulate",
    "key_rate",
    "max_distance",
]

MODES = ("loose", "precise")


@dataclass(frozen=True)
class KeyRateResult:
    """Per-round secret key rate with every intermediate for audit."""

    rate_per_round: float
    n_untagged: float
    e_ph_used: float
    e_z: float
    mode: str
    audit: dict = field(default_factory=dict)

    def recombine(self) -> float:
        """Recompute the rate from the audit entries."""
        a = self.audit
        raw = (
            a["n_key"] * privacy_factor(a["e_ph_key"])
            - a["f_ec"] * a["n_ec"] * binary_entropy(a["e_z_ec"])
        ) / a["total_rounds"]
        return max(raw, 0.0)


def untagged_fraction(p: float, mu_z: float) -> float:
    """Probability that a code round is untagged (either party ordering)."""
    if not 0.0 < p < 1.0 or mu_z < 0:
        raise ValueError("need 0 < p < 1 and mu_z >= 0")
    return 2.0 * p * (1.0 - p) * mu_z * math.exp(-mu_z)


# ---------------------------------------------------------------------------
# code-mode branch bookkeeping

def _branch_click_weights(protocol: SnsParams, stats):
    """Click-weighted probabilities of the four code-mode branches.

    Returns (alice_only, bob_only, both, none); alice_only/bob_only carry
    agreeing bits, the other two are bit errors.
    """
    w_single, w_both, w_none = stats.extras["branch_weights"]
    q_single = stats.extras["q_single"]
    q_a = 0.5 * w_single * q_single
    q_b = 0.5 * w_single * q_single
    q_both = w_both * stats.extras["q_both"]
    q_none = w_none * stats.s00
    return q_a, q_b, q_both, q_none


def aopp_expectations(protocol: SnsParams, stats, s1: float) -> dict:
    """Analytic expectations of the odd-parity pairing step.

    Bob pairs each of his 0-bits with a distinct 1-bit; a pair survives
    when Alice's two bits differ.  Surviving pairs made of two correct
    bits stay correct, pairs made of two errors become errors.
    """
    q_a, q_b, q_both, q_none = _branch_click_weights(protocol, stats)
    n0_frac = q_b + q_both  # Bob sent -> bit 0
    n1_frac = q_a + q_none
    if n0_frac <= 0 or n1_frac <= 0:
        return {"pair_frac": 0.0, "survival": 0.0, "pair_error": 0.0,
                "untagged_pair_frac": 0.0, "n0_frac": n0_frac, "n1_frac": n1_frac}
    c0 = q_b / n0_frac
    c1 = q_a / n1_frac
    w0, w1 = 1.0 - c0, 1.0 - c1
    survival = c0 * c1 + w0 * w1
    pair_error = (w0 * w1) / survival if survival > 0 else 0.0
    # Untagged fraction among correct single-send clicks: the sender's
    # pulse carried one photon and that photon's yield is s1.
    mu_z = protocol.signal_intensity
    q_single = stats.extras["q_single"]
    u = min(1.0, mu_z * math.exp(-mu_z) * s1 / q_single) if q_single > 0 else 0.0
    pair_frac = min(n0_frac, n1_frac)
    return {
        "pair_frac": pair_frac,
        "survival": survival,
        "pair_error": pair_error,
        "untagged_pair_frac": (c0 * u) * (c1 * u),
        "n0_frac": n0_frac,
        "n1_frac": n1_frac,
        "untagged_per_bit": u,
    }


def sample_code_bits(protocol: SnsParams, chan: ChannelParams, n: int,
                     rng: np.random.Generator):
    """Draw modeled effective code-mode bit strings for both parties."""
    stats = channel_mod.sns_statistics(protocol, chan)
    q = np.array(_branch_click_weights(protocol, stats))
    q /= q.sum()
    branch = rng.choice(4, size=n, p=q)
    # branch 0: Alice only (1,1); 1: Bob only (0,0); 2: both (1,0); 3: none (0,1)
    bits_a = np.where((branch == 0) | (branch == 2), 1, 0).astype(np.int8)
    bits_b = np.where((branch == 1) | (branch == 2), 0, 1).astype(np.int8)
    return bits_a, bits_b


def aopp_simulate(bits_alice, bits_bob, seed=0):
    """Execute the odd-parity pairing on explicit bit strings.

    Returns (surviving pairs, post-pairing error count).  Deterministic
    for a given seed.
    """
    bits_alice = np.asarray(bits_alice)
    bits_bob = np.asarray(bits_bob)
    if bits_alice.shape != bits_bob.shape:
        raise ValueError("bit strings must have equal length")
    rng = np.random.default_rng(seed)
    idx0 = np.flatnonzero(bits_bob == 0)
    idx1 = np.flatnonzero(bits_bob == 1)
    m = min(len(idx0), len(idx1))
    if m == 0:
        return 0, 0
    idx0 = rng.permutation(idx0)[:m]
    idx1 = rng.permutation(idx1)[:m]
    a0 = bits_alice[idx0]
    a1 = bits_alice[idx1]
    survive = a0 != a1
    # Bob's pair is always (0, 1); Alice's surviving pair is an error
    # exactly when it is (1, 0).
    errors = int(np.count_nonzero(survive & (a0 == 1)))
    return int(np.count_nonzero(survive)), errors


# ---------------------------------------------------------------------------
# key rate

def _finite_gain(gain: float, n_instances: float, eps: float, direction: str,
                 enabled: bool) -> float:
    """Chernoff-adjusted gain given the number of contributing instances."""
    if not enabled or n_instances <= 0:
        return gain
    count = gain * n_instances
    if direction == "lower":
        return chernoff_lower(count, eps) / n_instances
    return chernoff_upper(count, eps) / n_instances


def key_rate(protocol: SnsParams, chan: ChannelParams, mode: str = "precise") -> KeyRateResult:
    """Per-round key rate of the modeled protocol at one distance."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    fin = protocol.finite
    stats = channel_mod.sns_statistics(protocol, chan)
    n_total = fin.total_rounds
    n_z = n_total * protocol.z_fraction
    n_dec = n_total - n_z
    p_vac, p_nu, p_mu1 = protocol.decoy_probs
    eps = fin.epsilon
    eps_budget = 0.0
    audit = {}

    def spend(val):
        nonlocal eps_budget
        eps_budget += eps
        return val

    # one-sided decoy gains (both orientations pooled)
    gain_nu = 0.5 * (stats.decoy_gains[(protocol.nu, 0.0)]
                     + stats.decoy_gains[(0.0, protocol.nu)])
    gain_mu = 0.5 * (stats.decoy_gains[(protocol.mu1, 0.0)]
                     + stats.decoy_gains[(0.0, protocol.mu1)])
    n_nu = 2.0 * n_dec * p_nu * p_vac
    n_mu = 2.0 * n_dec * p_mu1 * p_vac
    n_00 = n_dec * p_vac * p_vac
    gain_nu_lo = spend(_finite_gain(gain_nu, n_nu, eps, "lower", fin.enabled))
    gain_mu_hi = spend(_finite_gain(gain_mu, n_mu, eps, "upper", fin.enabled))
    s00_hi = spend(_finite_gain(stats.s00, n_00, eps, "upper", fin.enabled))
    s00_lo = spend(_finite_gain(stats.s00, n_00, eps, "lower", fin.enabled))

    obs = DecoyObservations(protocol.nu, protocol.mu1, gain_nu_lo, gain_mu_hi, s00_hi)
    s1, s1_clamped = s1_lower_bound(obs, with_flag=True)

    # phase-test window
    n_post = n_dec * p_mu1 * p_mu1 * (protocol.slice_full_width / math.pi)
    t_hi = spend(_finite_gain(stats.t_delta, n_post, eps, "upper", fin.enabled))
    flags = {"s1_clamped": s1_clamped}
    if s1 <= 0.0:
        e_loose, e_used = 0.5, 0.5
    else:
        e_loose, lo_cl = eph_loose_sns(t_hi, s00_lo, s1, protocol.mu1, with_flag=True)
        flags["loose_clamped"] = lo_cl
        if mode == "precise":
            e_used, pr_cl = eph_precise_sns(e_loose, protocol.slice_full_width,
                                            with_flag=True)
            flags["precise_clamped"] = pr_cl
        else:
            e_used = e_loose

    # code mode
    n_unt = n_z * untagged_fraction(protocol.send_prob, protocol.signal_intensity) * s1
    if fin.enabled:
        n_unt = spend(chernoff_lower(n_unt, eps))
    n_clicks = n_z * stats.q_z
    e_z = stats.e_z

    if protocol.aopp_enabled:
        aopp = aopp_expectations(protocol, stats, s1)
        pairs = n_z * aopp["pair_frac"]
        n_ec = pairs * aopp["survival"]
        e_z_ec = aopp["pair_error"]
        n_key = pairs * aopp["untagged_pair_frac"]
        if fin.enabled:
            n_key = spend(chernoff_lower(n_key, eps))
        e_ph_key = min(0.5, 2.0 * e_used * (1.0 - e_used))
        audit["aopp"] = aopp
    else:
        n_ec = n_clicks
        e_z_ec = e_z
        n_key = n_unt
        e_ph_key = e_used

    raw = (n_key * privacy_factor(e_ph_key)
           - fin.ec_inefficiency * n_ec * binary_entropy(e_z_ec)) / n_total
    rate = max(raw, 0.0)

    audit.update({
        "distance_km": chan.distance_km,
        "eta_arm": stats.extras["eta_arm"],
        "s1_lower": s1,
        "t_delta": stats.t_delta,
        "t_delta_upper": t_hi,
        "s00": stats.s00,
        "e_ph_loose": e_loose,
        "e_ph_used": e_used,
        "q_z": stats.q_z,
        "n_untagged": n_unt,
        "n_key": n_key,
        "e_ph_key": e_ph_key,
        "n_ec": n_ec,
        "e_z_ec": e_z_ec,
        "f_ec": fin.ec_inefficiency,
        "total_rounds": n_total,
        "epsilon_budget": eps_budget,
        "flags": flags,
        "raw_rate": raw,
    })
    return KeyRateResult(
        rate_per_round=rate, n_untagged=n_unt, e_ph_used=e_used,
        e_z=e_z, mode=mode, audit=audit,
    )


def max_distance(protocol: SnsParams, chan_template: ChannelParams,
                 mode: str = "precise", d_max: float = 800.0,
                 resolution: float = 0.1, rate_fn=None):
    """Largest distance with a positive rate, by coarse scan plus bisection.

    Returns (distance_km, at_ceiling).  ``rate_fn(distance) -> rate``
    overrides the default fixed-parameter evaluation (used for
    per-distance optimized scans).
    """
    if rate_fn is None:
        def rate_fn(d):
            return key_rate(protocol, chan_template.at_distance(d), mode).rate_per_round

    if rate_fn(d_max) > 0.0:
        return d_max, True
    lo, hi = 0.0, d_max
    if rate_fn(lo) <= 0.0:
        return 0.0, False
    # coarse scan to tighten the bracket (rates can be non-monotonic only
    # at the floor, so the first nonpositive point brackets the cutoff)
    step = max(resolution, (hi - lo) / 32.0)
    d = lo
    while d + step < hi:
        if rate_fn(d + step) <= 0.0:
            hi = d + step
            break
        d += step
    lo = d
    while hi - lo > resolution:
        mid = (lo + hi) / 2.0
        if rate_fn(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo, False
