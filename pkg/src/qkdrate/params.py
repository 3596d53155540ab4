"""Parameter records shared by the channel model and the protocol engines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class ChannelParams:
    """Symmetric lossy fiber link with threshold detectors at the midpoint."""

    distance_km: float = 0.0
    loss_coeff_db_per_km: float = 0.2
    detector_efficiency: float = 0.30
    dark_count: float = 1e-8
    misalign_x: float = 0.05
    misalign_z: float = 0.005

    def __post_init__(self):
        if self.distance_km < 0:
            raise ValueError(f"distance must be nonnegative, got {self.distance_km}")
        for name in ("detector_efficiency", "dark_count", "misalign_x", "misalign_z"):
            _check_prob(name, getattr(self, name))

    def at_distance(self, distance_km: float) -> "ChannelParams":
        return ChannelParams(
            distance_km,
            self.loss_coeff_db_per_km,
            self.detector_efficiency,
            self.dark_count,
            self.misalign_x,
            self.misalign_z,
        )


@dataclass(frozen=True)
class FiniteKeyParams:
    """Statistical-fluctuation layer settings."""

    total_rounds: float = 1e12
    epsilon: float = 1e-20
    security_level: float = 4.66e-9
    ec_inefficiency: float = 1.1
    enabled: bool = True

    def __post_init__(self):
        if self.total_rounds < 1:
            raise ValueError("total_rounds must be at least 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.ec_inefficiency < 1.0:
            raise ValueError("error-correction inefficiency must be >= 1")


@dataclass(frozen=True)
class SnsParams:
    """Send-or-not-send protocol settings.

    ``slice_full_width`` is the full width Delta of the phase window
    |theta_A - theta_B| <= Delta/2.
    """

    send_prob: float = 0.12
    signal_intensity: float = 0.45
    mu1: float = 0.45
    nu: float = 0.1
    slice_full_width: float = math.pi / 8
    z_fraction: float = 0.8
    decoy_probs: tuple = (0.4, 0.4, 0.2)  # vacuum, nu, mu1
    finite: FiniteKeyParams = field(default_factory=FiniteKeyParams)
    aopp_enabled: bool = True

    def __post_init__(self):
        if not 0.0 < self.send_prob < 1.0:
            raise ValueError("send probability must lie in (0, 1)")
        for name in ("signal_intensity", "mu1", "nu"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.nu < self.mu1:
            raise ValueError("decoy intensity nu must be below mu1")
        if not 0.0 < self.slice_full_width < math.pi:
            raise ValueError("slice_full_width must lie in (0, pi)")
        _check_prob("z_fraction", self.z_fraction)
        if abs(sum(self.decoy_probs) - 1.0) > 1e-9 or len(self.decoy_probs) != 3:
            raise ValueError("decoy_probs must be three probabilities summing to 1")


@dataclass(frozen=True)
class MpParams:
    """Mode-pairing protocol settings.

    ``slice_width`` is the half width Delta of the pairing-phase window
    |delta_a - delta_b| <= Delta.
    """

    mu: float = 0.4
    nu: float = 0.1
    intensity_probs: tuple = (0.38, 0.06, 0.56)  # mu, nu, vacuum
    max_pair_interval: int = 100
    slice_width: float = math.pi / 8
    finite: FiniteKeyParams = field(
        default_factory=lambda: FiniteKeyParams(
            total_rounds=1e13, epsilon=1e-23, security_level=1e-10
        )
    )

    def __post_init__(self):
        if self.mu <= 0 or self.nu <= 0 or self.nu >= self.mu:
            raise ValueError("need 0 < nu < mu")
        if len(self.intensity_probs) != 3 or abs(sum(self.intensity_probs) - 1.0) > 1e-9:
            raise ValueError("intensity_probs must be three probabilities summing to 1")
        if any(p < 0 for p in self.intensity_probs):
            raise ValueError("intensity_probs must be nonnegative")
        if self.max_pair_interval < 1:
            raise ValueError("max_pair_interval must be at least 1")
        if not 0.0 < self.slice_width < math.pi / 2:
            raise ValueError("slice_width must lie in (0, pi/2)")
