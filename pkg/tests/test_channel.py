"""Lossy interference click model: examples, invariants, regressions."""

import math

import numpy as np
import pytest

from qkdrate.channel import (arm_transmittance, exactly_one_click,
                             interference_click_probs, mp_statistics,
                             phase_average, sns_statistics,
                             _one_click_probs_at)
from qkdrate.params import ChannelParams, MpParams, SnsParams


class TestArmTransmittance:
    def test_100km_unit_detector(self):
        chan = ChannelParams(distance_km=100.0, detector_efficiency=1.0)
        assert arm_transmittance(chan) == pytest.approx(0.1)

    def test_zero_distance(self):
        chan = ChannelParams(distance_km=0.0, detector_efficiency=0.3)
        assert arm_transmittance(chan) == pytest.approx(0.3)

    def test_380km(self):
        chan = ChannelParams(distance_km=380.0, detector_efficiency=0.3)
        assert arm_transmittance(chan) == pytest.approx(4.754679577383340e-05, rel=1e-12)


class TestInterference:
    def test_perfect_constructive(self):
        p_l, p_r = interference_click_probs(0.2, 0.2, 0.0, 0.5, 0.0)
        assert p_l == pytest.approx(1.0 - math.exp(-2 * 0.5 * 0.2))
        assert p_r == pytest.approx(0.0)

    def test_dark_counts_only(self):
        p_l, p_r = interference_click_probs(0.0, 0.0, 0.3, 0.9, 1e-6)
        assert p_l == pytest.approx(1e-6)
        assert p_r == pytest.approx(1e-6)

    def test_orthogonal_phase(self):
        p_l, p_r = interference_click_probs(0.1, 0.1, math.pi / 2, 0.01, 0.0)
        assert p_l == pytest.approx(1.0 - math.exp(-0.001))
        assert p_r == pytest.approx(1.0 - math.exp(-0.001))

    def test_negative_intensity_rejected(self):
        with pytest.raises(ValueError):
            interference_click_probs(-0.1, 0.1, 0.0, 0.5, 0.0)

    def test_exactly_one_click(self):
        only_l, only_r = exactly_one_click(0.3, 0.2)
        assert only_l == pytest.approx(0.3 * 0.8)
        assert only_r == pytest.approx(0.2 * 0.7)

    def test_swap_symmetry(self):
        # swapping the sources swaps the ports at the same relative phase
        for theta in (0.0, 0.7, 2.0):
            l1, r1 = interference_click_probs(0.3, 0.1, theta, 0.4, 1e-7)
            l2, r2 = interference_click_probs(0.1, 0.3, theta, 0.4, 1e-7)
            assert l1 == pytest.approx(l2, abs=1e-15)
            assert r1 == pytest.approx(r2, abs=1e-15)


class TestPhaseAverage:
    def test_constant(self):
        assert phase_average(lambda t: 0.7, 0.0, 1.3) == pytest.approx(0.7)

    def test_refinement_converges(self):
        # quadrature refinement must agree on a smooth click integrand
        f = lambda t: _one_click_probs_at(0.3, 0.3, t, 0.1, 1e-7, 0.05)[0]
        coarse = phase_average(f, -0.4, 0.4, n=32)
        fine = phase_average(f, -0.4, 0.4, n=64)
        assert coarse == pytest.approx(fine, abs=1e-12)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            phase_average(lambda t: t, 1.0, 1.0)


class TestSnsStatistics:
    def test_vacuum_counting_rate(self):
        stats = sns_statistics(SnsParams(), ChannelParams(distance_km=100.0))
        p_d = 1e-8
        assert stats.s00 == pytest.approx(2 * p_d * (1 - p_d), rel=1e-12)

    def test_no_wrong_port_without_noise(self):
        # matched phase, no misalignment, no dark counts: R never clicks alone
        reg_l, reg_r = _one_click_probs_at(0.45, 0.45, 0.0, 0.01, 0.0, 0.0)
        assert reg_r == 0.0
        assert reg_l > 0.0

    def test_probability_ranges_and_port_split(self):
        stats = sns_statistics(SnsParams(), ChannelParams(distance_km=200.0))
        for v in (stats.q_z, stats.e_z, stats.t_delta, stats.gain_delta, stats.s00):
            assert 0.0 <= v <= 1.0
        assert stats.t_delta <= stats.gain_delta
        assert stats.gain_delta == pytest.approx(stats.n_l + stats.n_r)

    def test_gains_decrease_with_distance(self):
        proto = SnsParams()
        prev = None
        for d in (0.0, 100.0, 200.0, 300.0, 400.0):
            stats = sns_statistics(proto, ChannelParams(distance_km=d))
            if prev is not None:
                for key, gain in stats.decoy_gains.items():
                    assert gain <= prev[key] + 1e-15
            prev = stats.decoy_gains

    def test_regression_lock_300km(self):
        stats = sns_statistics(SnsParams(), ChannelParams(distance_km=300.0))
        assert stats.q_z == pytest.approx(3.241645630439905e-05, rel=1e-9)
        assert stats.e_z == pytest.approx(0.12040550674383131, rel=1e-9)
        assert stats.t_delta == pytest.approx(1.4287151040138544e-05, rel=1e-9)


class TestMpStatistics:
    CHAN = ChannelParams(distance_km=160.0, detector_efficiency=0.70,
                         dark_count=1e-7)

    def test_vacuum_vacuum_round(self):
        stats = mp_statistics(MpParams(), self.CHAN)
        p_d = self.CHAN.dark_count
        assert stats.s00 == pytest.approx(2 * p_d * (1 - p_d), rel=1e-12)

    def test_noiseless_z_error_vanishes(self):
        chan = ChannelParams(distance_km=50.0, detector_efficiency=0.7,
                             dark_count=0.0, misalign_z=0.0)
        stats = mp_statistics(MpParams(), chan)
        assert stats.e_z == 0.0

    def test_regression_lock_160km(self):
        stats = mp_statistics(MpParams(), self.CHAN)
        assert stats.q_z == pytest.approx(0.005520441349667613, rel=1e-9)
        assert stats.e_z == pytest.approx(0.005017933346960738, rel=1e-9)
        assert stats.t_delta == pytest.approx(0.06152707393201632, rel=1e-9)

    def test_dark_counts_are_phase_blind(self):
        # as the decoy intensity vanishes with dark counts present, the
        # test-pair error ratio approaches the coin-flip floor
        chan = ChannelParams(distance_km=400.0, detector_efficiency=0.7,
                             dark_count=1e-6)
        proto = MpParams(mu=1e-3, nu=1e-5)
        stats = mp_statistics(proto, chan)
        assert stats.t_delta == pytest.approx(0.5, abs=1e-3)

    def test_window_error_between_floor_and_half(self):
        stats = mp_statistics(MpParams(), self.CHAN)
        assert self.CHAN.misalign_x <= stats.t_delta <= 0.5
