"""Acceptance gate: one test per release criterion, with stated tolerances.

Each test asserts both the numerical criterion and, where one is stated,
the runtime budget.  These run on the full problem sizes; the rest of the
suite covers the same code paths at unit scale.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from qkdrate import oracle, verify
from qkdrate.channel import arm_transmittance
from qkdrate.config import parse_config
from qkdrate.decoy import DecoyObservations, s1_lower_bound
from qkdrate.mp import key_rate_mp, max_distance_mp
from qkdrate.params import ChannelParams, FiniteKeyParams, MpParams, SnsParams
from qkdrate.phase_error import combine_ports
from qkdrate.scan import compare_summary, run_scan
from qkdrate.sns import key_rate, max_distance


def test_01_affine_relation_oracle():
    """10^4 random two-qubit states x 64 rotations agree to 1e-12 in <30 s."""
    t0 = time.monotonic()
    result = verify.affine_equivalence(seed=7, n_states=10_000, n_deltas=64)
    elapsed = time.monotonic() - t0
    assert result.residual < 1e-12, result.line()
    assert elapsed < 30.0, f"affine oracle took {elapsed:.1f} s"


def test_02_round_trip_identity():
    """average-then-tighten is the identity on a 100x100 grid in <1 s."""
    t0 = time.monotonic()
    result = verify.round_trip_identity(n=100)
    elapsed = time.monotonic() - t0
    assert result.residual < 1e-12, result.line()
    assert elapsed < 1.0, f"round trip took {elapsed:.2f} s"


def test_03_port_chain():
    """Window-averaged port errors tighten back to center values to 1e-10."""
    result = verify.appendix_port_chain()
    assert result.residual < 1e-10, result.line()


def test_04a_phase_error_bound_validity():
    """Both bounds dominate the exact untagged-state error at 25 distances."""
    proto = SnsParams(finite=FiniteKeyParams(enabled=False))
    half = proto.slice_full_width / 2.0
    sigma = oracle.untagged_projection()
    violations = []
    for d in np.linspace(0.0, 480.0, 25):
        chan = ChannelParams(distance_km=float(d))
        povm = oracle.lossy_port_povm(arm_transmittance(chan),
                                      chan.dark_count, chan.misalign_x)
        p_l, rho_l = oracle.collapse_ancilla(sigma, povm, 0)
        p_r, rho_r = oracle.collapse_ancilla(sigma, povm, 1)

        def exact(delta):
            return combine_ports(oracle.port_phase_error(rho_l, delta, "L"),
                                 oracle.port_phase_error(rho_r, delta, "R"),
                                 p_l, p_r)

        xs = np.linspace(-half, half, 201)
        exact_window = float(np.trapezoid([exact(x) for x in xs], xs)) / (2 * half)
        exact_center = exact(0.0)
        loose = key_rate(proto, chan, "loose").e_ph_used
        precise = key_rate(proto, chan, "precise").e_ph_used
        if loose < exact_window - 1e-12:
            violations.append((d, "loose", loose, exact_window))
        if precise < exact_center - 1e-12:
            violations.append((d, "precise", precise, exact_center))
    assert not violations, violations


def test_04b_single_photon_yield_bound_validity():
    """s1 lower bound never exceeds the true yield on 10^3 Poisson mixtures."""
    rng = np.random.default_rng(404)
    violations = 0
    for _ in range(1000):
        eta = 10.0 ** rng.uniform(-6, 0)
        dark = 10.0 ** rng.uniform(-9, -4)
        nu = rng.uniform(0.01, 0.2)
        mu = rng.uniform(0.25, 0.8)
        yields = [dark] + [1 - (1 - eta) ** n * (1 - dark) for n in range(1, 30)]

        def gain(intensity):
            return sum(math.exp(-intensity) * intensity ** n / math.factorial(n) * y
                       for n, y in enumerate(yields))

        obs = DecoyObservations(nu=nu, mu=mu, gain_nu=min(1.0, gain(nu)),
                                gain_mu=min(1.0, gain(mu)), gain_vacuum=yields[0])
        if s1_lower_bound(obs) > yields[1] + 1e-12:
            violations += 1
    assert violations == 0


def test_05_dominance_and_direction():
    """Tight rate >= loose rate at every default scan point; max distance too."""
    for protocol in ("sns", "mp"):
        cfg = parse_config({"protocol": protocol})
        rows = run_scan(cfg)
        bad = [r.distance_km for r in rows
               if r.rate_precise < r.rate_loose - 1e-18]
        assert not bad, f"{protocol}: tight rate below loose at {bad}"
    d_l, _ = max_distance(SnsParams(), ChannelParams(), "loose", d_max=560.0)
    d_p, _ = max_distance(SnsParams(), ChannelParams(), "precise", d_max=560.0)
    assert d_p >= d_l
    mp_chan = parse_config({"protocol": "mp"}).channel
    d_l, _ = max_distance_mp(MpParams(), mp_chan, "loose", d_max=520.0)
    d_p, _ = max_distance_mp(MpParams(), mp_chan, "precise", d_max=520.0)
    assert d_p >= d_l


def test_06_sns_improvement_profile():
    """Optimized SNS comparison: crossover in [300, 460] km, extension in [1, 6] km."""
    cfg = parse_config({"protocol": "sns", "optimize": True})
    t0 = time.monotonic()
    rows = run_scan(cfg)
    summary = compare_summary(cfg, rows=rows)
    elapsed = time.monotonic() - t0
    assert elapsed < 300.0, f"optimized sns scan took {elapsed:.0f} s"
    assert summary["crossover_km"] is not None
    assert 300.0 <= summary["crossover_km"] <= 460.0, summary
    assert 1.0 <= summary["extension_km"] <= 6.0, summary
    assert summary["peak_improvement_ratio"] >= 1.10, summary


def test_07_mp_improvement_profile():
    """Optimized MP comparison: crossover in [100, 220] km, extension in [0.5, 4] km."""
    cfg = parse_config({"protocol": "mp", "optimize": True})
    t0 = time.monotonic()
    rows = run_scan(cfg)
    summary = compare_summary(cfg, rows=rows)
    elapsed = time.monotonic() - t0
    assert elapsed < 300.0, f"optimized mp scan took {elapsed:.0f} s"
    assert summary["crossover_km"] is not None
    assert 100.0 <= summary["crossover_km"] <= 220.0, summary
    assert 0.5 <= summary["extension_km"] <= 4.0, summary


def test_08_monte_carlo_agreement():
    """Analytic pairing and post-processing match simulation within 3 sigma."""
    t0 = time.monotonic()
    pairing = verify.pairing_monte_carlo(n_rounds=10_000_000)
    aopp = verify.aopp_monte_carlo(n_bits=1_000_000)
    elapsed = time.monotonic() - t0
    assert pairing.residual < 1.0, pairing.line()
    assert aopp.residual < 1.0, aopp.line()
    assert elapsed < 120.0, f"Monte Carlo checks took {elapsed:.0f} s"


def test_09_determinism(tmp_path):
    """Identical config and seed produce byte-identical scan output."""
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps({
        "protocol": "sns", "seed": 123, "optimize": True,
        "scan": {"d_min": 100.0, "d_max": 140.0, "step": 20.0},
    }))
    outputs = []
    for name in ("first.csv", "second.csv"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "qkdrate.cli", "scan",
             "--config", str(cfg_path), "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
