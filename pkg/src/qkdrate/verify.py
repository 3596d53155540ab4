"""Oracle verification suite.

Re-derives every closed-form relation used by the analytic modules by
brute-force matrix arithmetic on random states, and validates the two
Monte Carlo oracles against their analytic expectations.  The CLI
``verify`` subcommand prints one line per invariant with the max
residual; any failure makes the process exit nonzero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel as channel_mod
from . import mp as mp_mod
from . import oracle
from . import phase_error as pe
from . import sns as sns_mod
from .params import ChannelParams, MpParams, SnsParams

__all__ = ["InvariantResult", "run_all"]


@dataclass(frozen=True)
class InvariantResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: max residual {self.residual:.3e} "
                f"(tolerance {self.tolerance:.0e})")


def _quad_average(f, lo, hi, n=200):
    # independent quadrature: composite Simpson, not Gauss-Legendre
    xs = np.linspace(lo, hi, 2 * n + 1)
    ys = np.array([f(x) for x in xs])
    h = (hi - lo) / (2 * n)
    integral = h / 3 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-1:2].sum())
    return integral / (hi - lo)


def affine_equivalence(seed=7, n_states=10_000, n_deltas=64) -> InvariantResult:
    """Direct rotated-basis error equals the extracted affine model."""
    rng = np.random.default_rng(seed)
    rhos = oracle.random_density_batch(rng, n_states)
    deltas = np.linspace(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3, n_deltas)
    direct = oracle.batch_rotated_basis_error(rhos, deltas)
    e_ph, a = oracle.batch_extract_affine(rhos)
    c, s = np.cos(deltas), np.sin(deltas)
    model = (e_ph[:, None] * c[None, :] + (1 - c[None, :]) / 2
             + a[:, None] * s[None, :])
    res = float(np.max(np.abs(direct - model)))
    # route a subsample through the scalar slice_value as well, so a defect
    # there cannot hide behind the vectorized expression above
    for i in range(0, n_states, max(1, n_states // 100)):
        m = pe.AffineSliceModel(min(max(e_ph[i], 0.0), 1.0), a[i])
        for k, d in enumerate(deltas):
            res = max(res, abs(pe.slice_value(m, d) - direct[i, k]))
    return InvariantResult("affine model vs direct rotated-basis error", res, 1e-12)


def slice_average_equivalence(seed=11, n_states=40) -> InvariantResult:
    """Quadrature of the direct error over a window matches the closed form."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        rho = oracle.random_density(rng)
        _, model = oracle.extract_affine(rho)
        for w in (0.2, 0.7, 1.3):
            quad = _quad_average(lambda d: oracle.rotated_basis_error(rho, d), -w, w)
            closed = pe.slice_average(model.e_ph, pe.PhaseSlice(w))
            worst = max(worst, abs(quad - closed))
    return InvariantResult("window average: quadrature vs closed form", worst, 1e-10)


def round_trip_identity(n=100) -> InvariantResult:
    """Tighten(average(e)) recovers e across the (e, w) grid."""
    worst = 0.0
    for e in np.linspace(0.0, 1.0, n):
        for w in np.linspace(1e-3, math.pi / 2 - 1e-3, n):
            back = pe.precise_from_loose(pe.slice_average(e, pe.PhaseSlice(w)), w)
            worst = max(worst, abs(back - e))
    return InvariantResult("average/tighten round trip", worst, 1e-12)


def port_identity(seed=13, n_states=200) -> InvariantResult:
    """L and R errors of a {|00>,|11>}-supported state sum to one."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        m2 = g @ g.conj().T
        m2 /= np.trace(m2).real
        m = np.zeros((4, 4), dtype=complex)
        m[np.ix_([0, 3], [0, 3])] = m2
        rho = oracle.DensityOp(m, dims=(2, 2))
        for d in (0.0, 0.4, 1.1):
            tot = (oracle.port_phase_error(rho, d, "L")
                   + oracle.port_phase_error(rho, d, "R"))
            worst = max(worst, abs(tot - 1.0))
    return InvariantResult("port error sum on the coherent subspace", worst, 1e-12)


def appendix_port_chain(delta_full=math.pi / 4, seed=17, n_states=25) -> InvariantResult:
    """Window-averaged port errors tighten back to their center values."""
    rng = np.random.default_rng(seed)
    half = delta_full / 2.0
    worst = 0.0
    # post-click states live on span{|00>, |11>}: only there does the
    # port error carry the affine cos/sin structure the inversion needs
    states = []
    for _ in range(n_states):
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        m2 = g @ g.conj().T
        m2 /= np.trace(m2).real
        m = np.zeros((4, 4), dtype=complex)
        m[np.ix_([0, 3], [0, 3])] = m2
        states.append(oracle.DensityOp(m, dims=(2, 2)))
    # include the collapsed one-photon state of the ideal port measurement
    sigma = oracle.untagged_projection()
    povm = oracle.ideal_port_povm()
    for j in (0, 1):
        _, rho = oracle.collapse_ancilla(sigma, povm, j)
        states.append(rho)
    for rho in states:
        for port in ("L", "R"):
            avg = _quad_average(
                lambda d: oracle.port_phase_error(rho, d, port), -half, half)
            back = pe.precise_from_loose(min(max(avg, 0.0), 1.0), half)
            worst = max(worst, abs(back - oracle.port_phase_error(rho, 0.0, port)))
    return InvariantResult("port window average tightens to center", worst, 1e-10)


def povm_completeness(seed=19, n_states=100) -> InvariantResult:
    """Outcome probabilities sum to one for random signal states."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    povms = [oracle.ideal_port_povm(),
             oracle.lossy_port_povm(0.3, 1e-6, 0.05)]
    for _ in range(n_states):
        rho = oracle.random_density(rng)
        for povm in povms:
            tot = sum(rho.expectation(np.asarray(e)) for e in povm.elements)
            worst = max(worst, abs(tot - 1.0))
    return InvariantResult("measurement completeness", worst, 1e-10)


def shared_phase_rotation(seed=23, n_cases=20) -> InvariantResult:
    """The ancilla rotation removes the announced-phase dependence."""
    rng = np.random.default_rng(seed)
    reference = oracle.untagged_projection(0.0, 0.0)
    worst = 0.0
    for _ in range(n_cases):
        a, b = rng.uniform(0, 2 * math.pi, size=2)
        rotated = oracle.rotate_ancillas(oracle.untagged_projection(a, b), a, b)
        worst = max(worst, abs(rotated.fidelity(reference) - 1.0))
    return InvariantResult("shared-phase rotation independence", worst, 1e-12)


def mp_state_expansion(seed=29, n_cases=10) -> InvariantResult:
    """Rotated-basis branch coefficients of the pairing state."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        da = rng.uniform(0, 2 * math.pi)
        ket = oracle.build_mp_joint_state(da, da)
        amps = ket.amplitudes.reshape(2, 2, 4, 4)
        plus_a = oracle.plus_delta(da)
        sig = np.zeros(4, dtype=complex)
        sig[0b01] = 1 / math.sqrt(2)
        sig[0b10] = np.exp(1j * da) / math.sqrt(2)
        # coefficient of |+da>_A (x) (|01> + e^{i da}|10>)/sqrt(2) on (A, a)
        coef = np.einsum("A,ABab,a->Bb", plus_a.conj(), amps, sig.conj())
        worst = max(worst, abs(np.linalg.norm(coef) - 1 / math.sqrt(2)))
    return InvariantResult("pairing-state rotated-branch coefficient", worst, 1e-12)


def mp_phase_chain(width=math.pi / 4, seed=41, n_states=15) -> InvariantResult:
    """Announced-phase-averaged pair errors tighten back to the center.

    The test-pair error at announced phases (da, da + d), averaged over
    da and then over d in [-width, width], must recover the d = 0 value
    through the same sinc inversion used by the analytic pipeline.
    """
    rng = np.random.default_rng(seed)
    states = [oracle.random_density(rng) for _ in range(n_states)]
    povm = oracle.mp_pair_povm()
    joint = oracle.build_mp_joint_state()
    for j, label in enumerate(povm.labels[:-1]):
        if label in ("LL", "RR"):
            _, rho = oracle.collapse_ancilla(joint, povm, j)
            states.append(rho)
    da_grid = np.linspace(0.0, 2 * math.pi, 48, endpoint=False)
    worst = 0.0
    for rho in states:
        def avg_over_da(d):
            return float(np.mean([oracle.mp_imagined_error(rho, da, da + d)
                                  for da in da_grid]))

        center = avg_over_da(0.0)
        loose = _quad_average(avg_over_da, -width, width, n=60)
        back = pe.precise_from_loose(min(max(loose, 0.0), 1.0), width)
        worst = max(worst, abs(back - center))
    return InvariantResult("pair-test window average tightens to center",
                           worst, 1e-10)


def pairing_monte_carlo(seed=31, n_rounds=10_000_000,
                        grid=None) -> InvariantResult:
    """Analytic pairing rate vs the explicit click-train simulation (3 sigma)."""
    rng = np.random.default_rng(seed)
    if grid is None:
        grid = [(q, l) for q in (0.001, 0.01, 0.05, 0.2, 0.5)
                for l in (1, 10, 100, 1000)]
    worst = 0.0
    for q, l in grid:
        expected = mp_mod.pairing_rate(q, l) * n_rounds
        observed = mp_mod.simulate_pairing(q, l, n_rounds, rng)
        sigma = math.sqrt(max(expected, 1.0))
        worst = max(worst, abs(observed - expected) / (3.0 * sigma))
    return InvariantResult("pairing rate vs Monte Carlo (3 sigma units)", worst, 1.0)


def aopp_monte_carlo(seed=37, n_bits=1_000_000,
                     distances=(200.0, 300.0, 400.0)) -> InvariantResult:
    """Analytic pairing survival/error vs the explicit bit simulation."""
    protocol = SnsParams()
    worst = 0.0
    for i, d in enumerate(distances):
        chan = ChannelParams(distance_km=d)
        stats = channel_mod.sns_statistics(protocol, chan)
        exp = sns_mod.aopp_expectations(protocol, stats, s1=1.0)
        rng = np.random.default_rng(seed + i)
        bits_a, bits_b = sns_mod.sample_code_bits(protocol, chan, n_bits, rng)
        survivors, errors = sns_mod.aopp_simulate(bits_a, bits_b, seed=seed + i)
        n_pairs = min(np.count_nonzero(bits_b == 0),
                      np.count_nonzero(bits_b == 1))
        exp_surv = n_pairs * exp["survival"]
        sig_surv = math.sqrt(max(n_pairs * exp["survival"] * (1 - exp["survival"]), 1.0))
        worst = max(worst, abs(survivors - exp_surv) / (3.0 * sig_surv))
        exp_err = survivors * exp["pair_error"]
        sig_err = math.sqrt(max(survivors * exp["pair_error"]
                                * (1 - exp["pair_error"]), 1.0))
        worst = max(worst, abs(errors - exp_err) / (3.0 * sig_err))
    return InvariantResult("pairing post-processing vs Monte Carlo (3 sigma units)",
                           worst, 1.0)


def run_all(seed=0, quick=False):
    """Run every invariant; returns a list of InvariantResult."""
    n_states = 500 if quick else 10_000
    n_rounds = 500_000 if quick else 10_000_000
    n_bits = 100_000 if quick else 1_000_000
    return [
        affine_equivalence(seed + 7, n_states=n_states),
        slice_average_equivalence(seed + 11),
        round_trip_identity(),
        port_identity(seed + 13),
        appendix_port_chain(seed=seed + 17),
        povm_completeness(seed + 19),
        shared_phase_rotation(seed + 23),
        mp_state_expansion(seed + 29),
        mp_phase_chain(seed=seed + 41),
        pairing_monte_carlo(seed + 31, n_rounds=n_rounds),
        aopp_monte_carlo(seed + 37, n_bits=n_bits),
    ]
