"""Brute-force verification engine on small dense Hilbert spaces.

Builds the entanglement-based states behind the send/not-send and
mode-pairing protocols (ancilla qubits tensored with truncated photon
modes), pushes them through explicit measurement operators, and measures
the ancillas in rotated bases.  Every closed-form relation used by the
analytic modules can be re-derived here by direct matrix arithmetic,
which is what the test suite and the ``verify`` subcommand do.

Conventions
-----------
* Single-qubit rotated basis: |+d> = (|0> + e^{-id}|1>)/sqrt(2),
  |-d> = (|0> - e^{-id}|1>)/sqrt(2).
* Two-qubit rotated basis on span{|00>, |11>}:
  |+d> = (|00> + e^{-id}|11>)/sqrt(2) and the orthogonal |-d>.
* Joint states are ordered (ancillas..., signal modes...); collapse
  traces out the trailing signal block.

Everything is dense numpy; dimensions stay tiny by construction, so
clarity wins over speed throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Ket",
    "DensityOp",
    "Povm",
    "AncillaDecomposition",
    "plus_delta",
    "minus_delta",
    "bell_plus_delta",
    "bell_minus_delta",
    "build_sns_joint_state",
    "untagged_projection",
    "rotate_ancillas",
    "collapse_ancilla",
    "rotated_basis_error",
    "extract_affine",
    "port_phase_error",
    "build_mp_joint_state",
    "mp_pair_povm",
    "mp_imagined_error",
    "ideal_port_povm",
    "lossy_port_povm",
    "random_density",
    "batch_extract_affine",
    "batch_rotated_basis_error",
]

from .phase_error import AffineSliceModel

_HERM_TOL = 1e-12
DEFAULT_ERROR_PATTERN = frozenset({("+", "-"), ("-", "+")})


@dataclass(frozen=True)
class Ket:
    """Normalized complex state vector with a subsystem dimension layout."""

    amplitudes: np.ndarray
    dims: tuple = ()

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise ValueError("cannot normalize a (near) zero vector")
        object.__setattr__(self, "amplitudes", amps / norm)
        dims = self.dims or (len(amps),)
        if int(np.prod(dims)) != len(amps):
            raise ValueError(f"dims {dims} inconsistent with length {len(amps)}")
        object.__setattr__(self, "dims", tuple(dims))

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def density(self) -> "DensityOp":
        return DensityOp(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def overlap(self, other: "Ket") -> complex:
        return complex(np.vdot(other.amplitudes, self.amplitudes))

    def fidelity(self, other: "Ket") -> float:
        return abs(self.overlap(other)) ** 2


@dataclass(frozen=True)
class DensityOp:
    """Dense density operator; validated Hermitian, unit trace, PSD."""

    matrix: np.ndarray
    dims: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        dims = self.dims or (m.shape[0],)
        object.__setattr__(self, "dims", tuple(dims))
        if m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("density matrix must be Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density matrix must have unit trace, got {tr}")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix must be positive semidefinite")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, op: np.ndarray) -> float:
        return float(np.trace(self.matrix @ op).real)


@dataclass(frozen=True)
class Povm:
    """Measurement effects (positive operators summing to identity).

    The last label designates the invalid outcome that is never used for
    key generation.
    """

    elements: tuple
    labels: tuple

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        object.__setattr__(self, "elements", elems)
        if len(elems) != len(self.labels):
            raise ValueError("one label per element required")
        dim = elems[0].shape[0]
        total = sum(elems)
        if np.max(np.abs(total - np.eye(dim))) > 1e-10:
            raise ValueError("POVM elements must sum to the identity")
        for e in elems:
            if np.linalg.eigvalsh((e + e.conj().T) / 2).min() < -1e-10:
                raise ValueError("POVM elements must be positive semidefinite")


@dataclass(frozen=True)
class AncillaDecomposition:
    """Conditional X-basis statistics of a two-qubit ancilla state."""

    p_plus: float
    p_minus: float
    e_plus: float
    e_minus: float
    x_plus: complex
    x_minus: complex

    @property
    def e_ph(self) -> float:
        return self.p_plus * self.e_plus + self.p_minus * self.e_minus

    @property
    def a_coeff(self) -> float:
        # sin-term of each branch: +Im x given +, -Im x given -
        return self.p_plus * self.x_plus.imag - self.p_minus * self.x_minus.imag


# ---------------------------------------------------------------------------
# basis vectors

def plus_delta(delta: float) -> np.ndarray:
    return np.array([1.0, np.exp(-1j * delta)]) / math.sqrt(2)


def minus_delta(delta: float) -> np.ndarray:
    return np.array([1.0, -np.exp(-1j * delta)]) / math.sqrt(2)


def bell_plus_delta(delta: float) -> np.ndarray:
    """(|00> + e^{-id}|11>)/sqrt(2) as a 4-vector."""
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0
    v[3] = np.exp(-1j * delta)
    return v / math.sqrt(2)


def bell_minus_delta(delta: float) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0
    v[3] = -np.exp(-1j * delta)
    return v / math.sqrt(2)


def _kron(*ops):
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


# ---------------------------------------------------------------------------
# state construction

def poisson_amplitudes(mu: float, phase: float, cutoff: int) -> np.ndarray:
    """Truncated coherent-state amplitudes sqrt(P_n) e^{i n phase}."""
    if mu < 0:
        raise ValueError("mean photon number must be nonnegative")
    if mu == 0.0:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    n = np.arange(cutoff + 1)
    log_p = -mu + n * math.log(mu) - np.array([math.lgamma(k + 1) for k in n])
    p = np.exp(log_p)
    tail = 1.0 - p.sum()
    if tail > 1e-10:
        raise ValueError(
            f"photon cutoff {cutoff} too small for mu={mu}: tail mass {tail:.3e}"
        )
    return np.sqrt(p) * np.exp(1j * n * phase)


def build_sns_joint_state(p: float, mu: float, alpha: float, beta: float,
                          cutoff: int = 8) -> Ket:
    """Joint ancilla/signal state of one send-or-not-send code round.

    Layout: qubit_A (x) qubit_B (x) mode_a (x) mode_b, with photon modes
    truncated at ``cutoff``.  Alice's key qubit is |1> when she sends,
    Bob's is |0> when he sends.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("send probability must lie in (0, 1)")
    if mu <= 0:
        raise ValueError("mean photon number must be positive")
    if cutoff < 4:
        raise ValueError("cutoff must be at least 4")
    d = cutoff + 1
    vac = np.zeros(d, dtype=complex)
    vac[0] = 1.0
    coh_a = poisson_amplitudes(mu, alpha, cutoff)
    coh_b = poisson_amplitudes(mu, beta, cutoff)

    q = {
        "0": np.array([1.0, 0.0], dtype=complex),
        "1": np.array([0.0, 1.0], dtype=complex),
    }
    sp = math.sqrt(p)
    sq = math.sqrt(1.0 - p)
    # (sqrt(1-p)|0,vac> + sqrt(p)|1,coh_a>)_Aa (x) (sqrt(p)|0,coh_b> + sqrt(1-p)|1,vac>)_Bb
    psi = (
        sq * sp * _kron(q["0"], q["0"], vac, coh_b)
        + sq * sq * _kron(q["0"], q["1"], vac, vac)
        + sp * sp * _kron(q["1"], q["0"], coh_a, coh_b)
        + sp * sq * _kron(q["1"], q["1"], coh_a, vac)
    )
    return Ket(psi, dims=(2, 2, d, d))


def untagged_projection(alpha: float = 0.0, beta: float = 0.0) -> Ket:
    """Normalized one-photon component where exactly one party sent.

    On qubit_A (x) qubit_B (x) two-level modes a, b:
    (|00>|01> e^{i(beta-alpha)} + |11>|10>)/sqrt(2).
    """
    psi = np.zeros(16, dtype=complex)
    # index = ((A*2 + B)*2 + n_a)*2 + n_b
    psi[0b0001] = np.exp(1j * (beta - alpha))
    psi[0b1110] = 1.0
    return Ket(psi, dims=(2, 2, 2, 2))


def rotate_ancillas(state: Ket, alpha: float, beta: float) -> Ket:
    """Apply the hypothetical shared-phase rotation on the ancilla pair.

    Diagonal unitary: |00>_AB -> e^{i(alpha-beta)}|00>, |11>_AB -> |11>,
    identity elsewhere; acts trivially on the signal modes.
    """
    dims = state.dims
    d_sig = int(np.prod(dims[2:])) if len(dims) > 2 else 1
    amps = state.amplitudes.reshape(2, 2, d_sig).copy()
    amps[0, 0, :] *= np.exp(1j * (alpha - beta))
    return Ket(amps.reshape(-1), dims=dims)


def build_mp_joint_state(delta_a: float = 0.0, delta_b: float = 0.0) -> Ket:
    """Single-photon-pair state of one mode-pairing coding event.

    Layout: qubit_A (x) qubit_B (x) modes a1 a2 (x) modes b1 b2 (each
    two-level).  The delta arguments only select the rotated ancilla
    bases used by the tests; the state itself is delta-independent:
    [(|0>_A|01> + |1>_A|10>)/sqrt(2)] (x) [(|0>_B|10> + |1>_B|01>)/sqrt(2)].
    """
    a_part = np.zeros((2, 4), dtype=complex)  # (A, a1a2)
    a_part[0, 0b01] = 1.0
    a_part[1, 0b10] = 1.0
    a_part /= math.sqrt(2)
    b_part = np.zeros((2, 4), dtype=complex)
    b_part[0, 0b10] = 1.0
    b_part[1, 0b01] = 1.0
    b_part /= math.sqrt(2)
    # order (A, a) x (B, b) -> (A, B, a, b)
    psi = np.einsum("Aa,Bb->ABab", a_part, b_part).reshape(-1)
    return Ket(psi, dims=(2, 2, 4, 4))


def mp_pair_povm() -> Povm:
    """Ideal two-round port measurement for the pairing state.

    Signal space: modes (a1 a2) (x) (b1 b2), 16-dimensional.  Each round
    i interferes a_i with b_i; a symmetric one-photon state clicks L, an
    antisymmetric one clicks R.  The four valid outcomes are the port
    patterns (L,L), (L,R), (R,L), (R,R); all else is invalid.
    """
    u = {
        "L": np.array([0.0, 1.0, 1.0, 0.0]) / math.sqrt(2),   # (|01>+|10>)/sqrt(2) on (a_i, b_i)
        "R": np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2),
    }
    elements = []
    labels = []
    for p1 in ("L", "R"):
        for p2 in ("L", "R"):
            # embed (a1,b1) round-1 and (a2,b2) round-2 vectors into
            # the (a1 a2, b1 b2) ordering
            v = np.zeros(16, dtype=complex)
            for a1 in range(2):
                for b1 in range(2):
                    for a2 in range(2):
                        for b2 in range(2):
                            idx = (a1 * 2 + a2) * 4 + (b1 * 2 + b2)
                            v[idx] = u[p1][a1 * 2 + b1] * u[p2][a2 * 2 + b2]
            elements.append(np.outer(v, v.conj()))
            labels.append(p1 + p2)
    total = sum(elements)
    elements.append(np.eye(16) - total)
    labels.append("invalid")
    return Povm(tuple(elements), tuple(labels))


def mp_imagined_error(rho_ab: DensityOp, delta_a: float, delta_b: float,
                      error_pattern=DEFAULT_ERROR_PATTERN) -> float:
    """Error probability of the predetermined-phase test measurement.

    Alice measures her ancilla in X_{delta_a}; Bob measures his in the
    conjugate-rotated basis X_{-delta_b} (his key convention attaches the
    opposite phase sign to the signal mode).  For the ideal pairing state
    the result depends only on delta_a - delta_b.
    """
    if rho_ab.dim != 4:
        raise ValueError("expected a two-qubit density operator")
    vec_a = {"+": plus_delta(delta_a), "-": minus_delta(delta_a)}
    vec_b = {"+": plus_delta(-delta_b), "-": minus_delta(-delta_b)}
    prob = 0.0
    for a, b in error_pattern:
        v = np.kron(vec_a[a], vec_b[b])
        prob += float(np.real(v.conj() @ rho_ab.matrix @ v))
    return prob


# ---------------------------------------------------------------------------
# measurement

def collapse_ancilla(joint, povm: Povm, outcome: int):
    """Apply one measurement effect to the signal block.

    Returns (outcome probability, normalized post-measurement density
    operator on the ancilla block).
    """
    if not 0 <= outcome < len(povm.elements):
        raise ValueError(f"outcome index {outcome} out of range")
    effect = povm.elements[outcome]
    dims = joint.dims
    d_anc = int(np.prod(dims[:2]))
    d_sig = int(np.prod(dims[2:]))
    if effect.shape[0] != d_sig:
        raise ValueError("effect dimension does not match the signal block")
    if isinstance(joint, Ket):
        w = joint.amplitudes.reshape(d_anc, d_sig)
        raw = w @ effect.T @ w.conj().T
    else:
        r = joint.matrix.reshape(d_anc, d_sig, d_anc, d_sig)
        raw = np.einsum("asbt,ts->ab", r, effect)
    prob = float(np.trace(raw).real)
    if prob <= 1e-15:
        raise ValueError(f"outcome {outcome} has (near) zero probability {prob}")
    rho = (raw + raw.conj().T) / (2 * prob)
    return prob, DensityOp(rho, dims=dims[:2])


def rotated_basis_error(rho_ab: DensityOp, delta: float,
                        error_pattern=DEFAULT_ERROR_PATTERN) -> float:
    """Error probability with Alice in X and Bob in the X_delta basis."""
    if rho_ab.dim != 4:
        raise ValueError("expected a two-qubit density operator")
    vec = {
        "+": plus_delta(0.0),
        "-": minus_delta(0.0),
    }
    vec_b = {
        "+": plus_delta(delta),
        "-": minus_delta(delta),
    }
    prob = 0.0
    for a, b in error_pattern:
        v = np.kron(vec[a], vec_b[b])
        prob += float(np.real(v.conj() @ rho_ab.matrix @ v))
    return prob


def extract_affine(rho_ab: DensityOp):
    """Condition on Alice's X outcome; recover the affine slice model.

    Returns (AncillaDecomposition, AffineSliceModel).  The model's
    slice_value reproduces rotated_basis_error for every delta.
    """
    if rho_ab.dim != 4:
        raise ValueError("expected a two-qubit density operator")
    r = rho_ab.matrix.reshape(2, 2, 2, 2)
    plus = plus_delta(0.0)
    minus = minus_delta(0.0)

    def _conditional(avec):
        bmat = np.einsum("a,abcd,c->bd", avec.conj(), r, avec)
        p = float(np.trace(bmat).real)
        return p, bmat

    p_plus, b_plus = _conditional(plus)
    p_minus, b_minus = _conditional(minus)

    def _decompose(bmat, p, err_vec):
        if p < 1e-14:
            return 0.0, 0.0 + 0.0j
        bn = bmat / p
        e = float(np.real(err_vec.conj() @ bn @ err_vec))
        x = complex(plus.conj() @ bn @ minus)
        return e, x

    # Given +: error outcome is |-_delta>.  Both branches carry the same
    # off-diagonal element <+|B|-> of Bob's conditional state.
    e_plus, x_plus = _decompose(b_plus, p_plus, minus)
    # Given -: error outcome is |+_delta>.
    e_minus, x_minus = _decompose(b_minus, p_minus, plus)

    dec = AncillaDecomposition(p_plus, p_minus, e_plus, e_minus, x_plus, x_minus)
    model = AffineSliceModel(min(max(dec.e_ph, 0.0), 1.0), dec.a_coeff)
    return dec, model


def port_phase_error(rho_ab: DensityOp, delta: float, port: str) -> float:
    """Phase error of a click event at one port, in the rotated pair basis.

    L-port errors project on |-delta> = (|00> - e^{-id}|11>)/sqrt(2),
    R-port errors on |+delta>.
    """
    if port not in ("L", "R"):
        raise ValueError(f"port must be 'L' or 'R', got {port!r}")
    v = bell_minus_delta(delta) if port == "L" else bell_plus_delta(delta)
    return float(np.real(v.conj() @ rho_ab.matrix @ v))


# ---------------------------------------------------------------------------
# signal-space measurement models

def _one_photon_vectors(d_sig: int = 4):
    psi_plus = np.zeros(d_sig, dtype=complex)
    psi_minus = np.zeros(d_sig, dtype=complex)
    psi_plus[0b01] = psi_plus[0b10] = 1 / math.sqrt(2)
    psi_minus[0b01], psi_minus[0b10] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    return psi_plus, psi_minus


def ideal_port_povm() -> Povm:
    """Perfect discrimination of the symmetric/antisymmetric photon state.

    Acts on the 4-dim two-mode space {|00>, |01>, |10>, |11>}; the L port
    fires on the symmetric one-photon state, the R port on the
    antisymmetric one; everything else is invalid.
    """
    psi_plus, psi_minus = _one_photon_vectors()
    e_l = np.outer(psi_plus, psi_plus.conj())
    e_r = np.outer(psi_minus, psi_minus.conj())
    e_inv = np.eye(4) - e_l - e_r
    return Povm((e_l, e_r, e_inv), ("L", "R", "invalid"))


def lossy_port_povm(eta: float, p_dark: float, e_mis: float) -> Povm:
    """Port measurement under loss, dark counts and misalignment.

    Exactly-one-detector-clicks convention: a surviving photon in the
    symmetric (antisymmetric) state reaches the L (R) detector, the label
    is swapped with probability ``e_mis``, dark counts fire independently
    with probability ``p_dark`` per detector, and rounds with zero or two
    clicking detectors are invalid.
    """
    for name, v in (("eta", eta), ("p_dark", p_dark), ("e_mis", e_mis)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    psi_plus, psi_minus = _one_photon_vectors()
    p_p = np.outer(psi_plus, psi_plus.conj())
    p_m = np.outer(psi_minus, psi_minus.conj())
    p_vac = np.zeros((4, 4), dtype=complex)
    p_vac[0, 0] = 1.0
    p_two = np.zeros((4, 4), dtype=complex)
    p_two[3, 3] = 1.0

    nd = 1.0 - p_dark
    dark_only = p_dark * nd  # this detector dark, other silent
    # One photon present: detected w.p. eta at its port (label swap w.p.
    # e_mis), lost w.p. 1-eta leaving dark counts only.
    e_l = (
        nd * eta * ((1 - e_mis) * p_p + e_mis * p_m)
        + dark_only * (1 - eta) * (p_p + p_m)
        + dark_only * p_vac
    )
    e_r = (
        nd * eta * ((1 - e_mis) * p_m + e_mis * p_p)
        + dark_only * (1 - eta) * (p_p + p_m)
        + dark_only * p_vac
    )
    # Two photons bunch at the beamsplitter and exit one random port.
    c_two = nd * (eta * eta / 2 + eta * (1 - eta)) + (1 - eta) ** 2 * dark_only
    e_l = e_l + c_two * p_two
    e_r = e_r + c_two * p_two
    e_inv = np.eye(4) - e_l - e_r
    return Povm((e_l, e_r, e_inv), ("L", "R", "invalid"))


# ---------------------------------------------------------------------------
# random states and batched evaluation

def random_density(rng: np.random.Generator, dim: int = 4) -> DensityOp:
    """Ginibre-induced random density operator."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return DensityOp(m / np.trace(m).real, dims=(2, 2) if dim == 4 else (dim,))


def random_density_batch(rng: np.random.Generator, n: int, dim: int = 4) -> np.ndarray:
    g = rng.standard_normal((n, dim, dim)) + 1j * rng.standard_normal((n, dim, dim))
    m = np.einsum("nij,nkj->nik", g, g.conj())
    tr = np.einsum("nii->n", m).real
    return m / tr[:, None, None]


def batch_extract_affine(rhos: np.ndarray):
    """Vectorized extract_affine over stacked two-qubit density matrices.

    Returns (e_ph, a_coeff) arrays of shape (n,).
    """
    r = rhos.reshape(-1, 2, 2, 2, 2)
    plus = plus_delta(0.0)
    minus = minus_delta(0.0)
    b_plus = np.einsum("a,nabcd,c->nbd", plus.conj(), r, plus)
    b_minus = np.einsum("a,nabcd,c->nbd", minus.conj(), r, minus)
    # The unnormalized conditional blocks already carry the p_+/- weights,
    # so the weighted sums below need no explicit division.
    e_plus = np.einsum("b,nbd,d->n", minus.conj(), b_plus, minus).real
    x_plus = np.einsum("b,nbd,d->n", plus.conj(), b_plus, minus)
    e_minus = np.einsum("b,nbd,d->n", plus.conj(), b_minus, plus).real
    x_minus = np.einsum("b,nbd,d->n", plus.conj(), b_minus, minus)
    e_ph = e_plus + e_minus
    a_coeff = x_plus.imag - x_minus.imag
    return e_ph, a_coeff


def batch_rotated_basis_error(rhos: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """Direct error probabilities, shape (n_states, n_deltas)."""
    plus = plus_delta(0.0)
    minus = minus_delta(0.0)
    phases = np.exp(-1j * np.asarray(deltas))
    # Bob basis vectors stacked over delta: (n_delta, 2)
    b_plus = np.stack([np.full_like(phases, 1 / math.sqrt(2)),
                       phases / math.sqrt(2)], axis=1)
    b_minus = np.stack([np.full_like(phases, 1 / math.sqrt(2)),
                        -phases / math.sqrt(2)], axis=1)
    r = rhos.reshape(-1, 2, 2, 2, 2)

    def prob(avec, bvecs):
        t = np.einsum("a,nabcd,c->nbd", avec.conj(), r, avec)
        return np.einsum("kb,nbd,kd->nk", bvecs.conj(), t, bvecs).real

    return prob(plus, b_minus) + prob(minus, b_plus)
