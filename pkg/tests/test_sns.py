"""Send-or-not-send key-rate pipeline."""

import math

import numpy as np
import pytest

from qkdrate.params import ChannelParams, FiniteKeyParams, SnsParams
from qkdrate.sns import (aopp_expectations, aopp_simulate, key_rate,
                         max_distance, sample_code_bits, untagged_fraction)
from qkdrate.channel import sns_statistics


class TestUntaggedFraction:
    def test_vanishing_intensity(self):
        assert untagged_fraction(0.5, 1e-12) == pytest.approx(0.0, abs=1e-12)

    def test_half_send_unit_intensity(self):
        assert untagged_fraction(0.5, 1.0) == pytest.approx(
            0.5 * math.exp(-1.0), abs=1e-12)

    def test_degenerate_send_probs(self):
        assert untagged_fraction(1e-12, 0.4) == pytest.approx(0.0, abs=1e-11)
        assert untagged_fraction(1 - 1e-12, 0.4) == pytest.approx(0.0, abs=1e-11)
        with pytest.raises(ValueError):
            untagged_fraction(0.0, 0.4)


class TestAoppSimulate:
    def test_perfect_correlated(self):
        # every Bob (0, 1) pair maps to an Alice (0, 1) pair: no errors
        bits_b = np.array([0, 1] * 500)
        survivors, errors = aopp_simulate(bits_b.copy(), bits_b, seed=1)
        assert survivors == 500
        assert errors == 0

    def test_fully_anticorrelated_all_errors(self):
        bits_b = np.array([0, 1] * 500)
        survivors, errors = aopp_simulate(1 - bits_b, bits_b, seed=1)
        assert survivors == 500
        assert errors == 500

    def test_no_zero_bits(self):
        bits_b = np.ones(100, dtype=int)
        survivors, errors = aopp_simulate(bits_b.copy(), bits_b, seed=1)
        assert survivors == 0 and errors == 0

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = rng.integers(0, 2, 1000)
        b = rng.integers(0, 2, 1000)
        assert aopp_simulate(a, b, seed=42) == aopp_simulate(a, b, seed=42)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            aopp_simulate(np.zeros(3), np.zeros(4))

    def test_matches_expectations_at_300km(self):
        proto = SnsParams()
        chan = ChannelParams(distance_km=300.0)
        stats = sns_statistics(proto, chan)
        exp = aopp_expectations(proto, stats, s1=1.0)
        rng = np.random.default_rng(11)
        n = 200_000
        bits_a, bits_b = sample_code_bits(proto, chan, n, rng)
        survivors, errors = aopp_simulate(bits_a, bits_b, seed=11)
        n_pairs = min(np.count_nonzero(bits_b == 0), np.count_nonzero(bits_b == 1))
        exp_surv = n_pairs * exp["survival"]
        sigma = math.sqrt(exp_surv * (1 - exp["survival"]))
        assert abs(survivors - exp_surv) < 4 * sigma
        exp_err = survivors * exp["pair_error"]
        sigma_e = math.sqrt(max(exp_err * (1 - exp["pair_error"]), 1.0))
        assert abs(errors - exp_err) < 4 * sigma_e


class TestKeyRate:
    def test_mode_validation(self):
        with pytest.raises(ValueError):
            key_rate(SnsParams(), ChannelParams(), "sloppy")

    def test_dominance_across_distances(self):
        proto = SnsParams()
        for d in (0.0, 100.0, 250.0, 380.0, 405.0):
            chan = ChannelParams(distance_km=d)
            r_l = key_rate(proto, chan, "loose")
            r_p = key_rate(proto, chan, "precise")
            assert r_p.rate_per_round >= r_l.rate_per_round - 1e-18
            assert r_p.e_ph_used <= r_l.e_ph_used + 1e-15

    def test_audit_recombination(self):
        for d in (50.0, 300.0):
            res = key_rate(SnsParams(), ChannelParams(distance_km=d), "precise")
            assert res.recombine() == pytest.approx(res.rate_per_round, abs=1e-12)

    def test_noise_floor_kills_rate(self):
        # with the error rate pinned at one half the untagged term is dead
        chan = ChannelParams(distance_km=100.0, dark_count=0.01, misalign_x=0.5)
        res = key_rate(SnsParams(), chan, "precise")
        assert res.rate_per_round == 0.0

    def test_infinite_key_beats_finite(self):
        chan = ChannelParams(distance_km=300.0)
        fin = key_rate(SnsParams(), chan, "precise")
        inf = key_rate(SnsParams(finite=FiniteKeyParams(enabled=False)),
                       chan, "precise")
        assert inf.rate_per_round >= fin.rate_per_round

    def test_flags_and_budget_present(self):
        res = key_rate(SnsParams(), ChannelParams(distance_km=200.0), "loose")
        assert "flags" in res.audit
        assert res.audit["epsilon_budget"] > 0.0

    def test_aopp_reduces_bit_error(self):
        chan = ChannelParams(distance_km=300.0)
        with_pairs = key_rate(SnsParams(), chan, "precise")
        without = key_rate(SnsParams(aopp_enabled=False), chan, "precise")
        assert with_pairs.audit["aopp"]["pair_error"] < without.e_z


class TestMaxDistance:
    def test_precise_extends_loose(self):
        d_l, ceil_l = max_distance(SnsParams(), ChannelParams(), "loose", d_max=500.0)
        d_p, ceil_p = max_distance(SnsParams(), ChannelParams(), "precise", d_max=500.0)
        assert not ceil_l and not ceil_p
        assert d_p >= d_l

    def test_ceiling_flag(self):
        chan = ChannelParams(dark_count=0.0, detector_efficiency=1.0)
        d, at_ceiling = max_distance(SnsParams(), chan, "precise", d_max=50.0)
        assert at_ceiling and d == 50.0
