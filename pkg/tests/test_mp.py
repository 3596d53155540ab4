"""Mode-pairing key-rate pipeline."""

import math

import numpy as np
import pytest

from qkdrate.params import ChannelParams, FiniteKeyParams, MpParams
from qkdrate.mp import (classify_pairs, key_rate_mp, max_distance_mp,
                        pairing_rate, simulate_pairing)

MP_CHAN = ChannelParams(distance_km=0.0, detector_efficiency=0.70,
                        dark_count=1e-7)


class TestPairingRate:
    def test_always_click_short_interval(self):
        assert pairing_rate(1.0, 1) == pytest.approx(0.5)

    def test_vanishing_click_probability(self):
        assert pairing_rate(1e-9, 100) == pytest.approx(0.0, abs=1e-6)

    def test_bounded_by_half(self):
        for q in (0.01, 0.1, 0.5, 1.0):
            for l in (1, 10, 1000):
                assert 0.0 <= pairing_rate(q, l) <= 0.5

    def test_monotone_in_interval(self):
        rates = [pairing_rate(0.01, l) for l in (1, 10, 100, 1000)]
        assert rates == sorted(rates)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            pairing_rate(0.0, 10)
        with pytest.raises(ValueError):
            pairing_rate(0.5, 0)

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(17)
        n = 2_000_000
        for q, l in ((0.01, 100), (0.2, 5)):
            expected = pairing_rate(q, l) * n
            observed = simulate_pairing(q, l, n, rng)
            sigma = math.sqrt(expected)
            assert abs(observed - expected) < 4 * sigma


class TestClassifyPairs:
    def test_no_vacuum_no_z_pairs(self):
        proto = MpParams(intensity_probs=(0.7, 0.3, 0.0))
        out = classify_pairs(proto, MP_CHAN)
        assert out.z_pair_fraction == pytest.approx(0.0, abs=1e-12)

    def test_all_vacuum(self):
        proto = MpParams(intensity_probs=(0.0, 0.0, 1.0))
        out = classify_pairs(proto, MP_CHAN)
        assert out.z_pair_fraction == pytest.approx(0.0, abs=1e-12)
        assert out.x_pair_fraction == pytest.approx(0.0, abs=1e-12)

    def test_fractions_sum_to_one(self):
        out = classify_pairs(MpParams(), MP_CHAN)
        total = (out.z_pair_fraction + out.x_pair_fraction
                 + out.discard_fraction)
        assert total == pytest.approx(1.0, abs=1e-12)
        assert out.pairs_per_round <= 0.5


class TestKeyRateMp:
    def test_mode_validation(self):
        with pytest.raises(ValueError):
            key_rate_mp(MpParams(), MP_CHAN, "neither")

    def test_dominance_across_distances(self):
        proto = MpParams()
        for d in (0.0, 100.0, 200.0, 300.0):
            chan = MP_CHAN.at_distance(d)
            r_l = key_rate_mp(proto, chan, "loose")
            r_p = key_rate_mp(proto, chan, "precise")
            assert r_p.rate_per_round >= r_l.rate_per_round - 1e-18
            assert r_p.e_ph_used <= r_l.e_ph_used + 1e-15

    def test_positive_at_paper_scale(self):
        res = key_rate_mp(MpParams(), MP_CHAN.at_distance(150.0), "precise")
        assert res.rate_per_round > 0.0

    def test_audit_recombination(self):
        for d in (50.0, 200.0):
            res = key_rate_mp(MpParams(), MP_CHAN.at_distance(d), "precise")
            assert res.recombine() == pytest.approx(res.rate_per_round, abs=1e-12)

    def test_noise_floor_kills_rate(self):
        chan = ChannelParams(distance_km=100.0, detector_efficiency=0.7,
                             dark_count=0.01, misalign_x=0.5, misalign_z=0.5)
        assert key_rate_mp(MpParams(), chan, "precise").rate_per_round == 0.0

    def test_infinite_key_beats_finite(self):
        chan = MP_CHAN.at_distance(200.0)
        fin = key_rate_mp(MpParams(), chan, "precise")
        inf = key_rate_mp(
            MpParams(finite=FiniteKeyParams(total_rounds=1e13, epsilon=1e-23,
                                            security_level=1e-10, enabled=False)),
            chan, "precise")
        assert inf.rate_per_round >= fin.rate_per_round


class TestMaxDistanceMp:
    def test_precise_extends_loose(self):
        d_l, ceil_l = max_distance_mp(MpParams(), MP_CHAN, "loose", d_max=400.0)
        d_p, ceil_p = max_distance_mp(MpParams(), MP_CHAN, "precise", d_max=400.0)
        assert not ceil_l and not ceil_p
        assert d_p >= d_l
