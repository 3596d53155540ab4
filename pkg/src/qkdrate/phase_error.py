"""Window-averaged phase-error arithmetic.

When the test basis is rotated by a small announced phase delta, the error
rate seen in that basis is an affine function of (cos delta, sin delta).
Averaging over a symmetric postselection window therefore mixes the
delta = 0 value with 1/2 through a sinc factor, and the mixing can be
inverted exactly.  Everything here is closed form and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhaseSlice",
    "AffineSliceModel",
    "PhaseErrorBounds",
    "InconsistentModelError",
    "sinc",
    "slice_value",
    "slice_average",
    "precise_from_loose",
    "binary_entropy",
    "privacy_factor",
    "combine_ports",
]

_SLICE_TOL = 1e-12


class InconsistentModelError(ValueError):
    """An affine slice model produced a value outside [0, 1]."""


@dataclass(frozen=True)
class PhaseSlice:
    """Symmetric postselection window: half width, centred at 0 or pi."""

    half_width: float
    center: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.half_width < math.pi / 2:
            raise ValueError(
                f"half_width must lie in (0, pi/2), got {self.half_width}"
            )
        if not 0.0 <= self.center < 2 * math.pi:
            raise ValueError(f"center must lie in [0, 2pi), got {self.center}")


@dataclass(frozen=True)
class AffineSliceModel:
    """Error rate at offset delta: e_ph*cos(d) + (1-cos(d))/2 + a*sin(d)."""

    e_ph: float
    a_coeff: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.e_ph <= 1.0:
            raise ValueError(f"e_ph must be a probability, got {self.e_ph}")
        if not -0.5 <= self.a_coeff <= 0.5:
            raise ValueError(f"a_coeff must lie in [-1/2, 1/2], got {self.a_coeff}")


@dataclass(frozen=True)
class PhaseErrorBounds:
    """A window-averaged loose bound and the tight value recovered from it."""

    loose: float
    window: PhaseSlice
    precise: float
    clamped: bool = False


def sinc(x: float) -> float:
    """sin(x)/x with the removable singularity handled.

    A short Taylor series is used for |x| < 1e-4 to avoid cancellation.
    """
    if abs(x) < 1e-4:
        x2 = x * x
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    return math.sin(x) / x


def slice_value(model: AffineSliceModel, delta: float) -> float:
    """Error rate of ``model`` in the basis rotated by ``delta``."""
    c = math.cos(delta)
    val = model.e_ph * c + (1.0 - c) / 2.0 + model.a_coeff * math.sin(delta)
    if val < -_SLICE_TOL or val > 1.0 + _SLICE_TOL:
        raise InconsistentModelError(
            f"slice value {val} outside [0,1] for delta={delta}: "
            f"model {model} is not a valid error-rate model"
        )
    return min(max(val, 0.0), 1.0)


def slice_average(e_ph: float, window: PhaseSlice) -> float:
    """Average of slice_value over the symmetric window.

    The sin term integrates to zero over a symmetric window, so the
    result does not depend on the a coefficient.
    """
    s = sinc(window.half_width)
    return (1.0 - s) / 2.0 + e_ph * s


def precise_from_loose(loose, half_width, with_flag=False):
    """Invert slice_average: recover the delta = 0 error rate.

    Returns loose/sinc(w) + (1 - 1/sinc(w))/2, clamped to [0, 1].  With
    ``with_flag=True`` returns (value, clamped).
    """
    if not 0.0 < half_width < math.pi / 2:
        raise ValueError(
            f"window half-width must lie in (0, pi/2), got {half_width}"
        )
    if not 0.0 <= loose <= 1.0:
        raise ValueError(f"loose bound must be a probability, got {loose}")
    inv = 1.0 / sinc(half_width)
    val = loose * inv + 0.5 * (1.0 - inv)
    clamped = val < 0.0 or val > 1.0
    val = min(max(val, 0.0), 1.0)
    if with_flag:
        return val, clamped
    return val


def binary_entropy(x: float) -> float:
    """Shannon entropy of a bit with bias x, in bits; H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"argument must be a probability, got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def privacy_factor(e_ph: float) -> float:
    """Secret fraction 1 - H(e_ph); zero for e_ph >= 1/2.

    A phase-error rate at or above one half yields no extractable key, so
    the factor is floored at zero rather than rebounding for e_ph > 1/2.
    """
    if e_ph >= 0.5:
        return 0.0
    return 1.0 - binary_entropy(e_ph)


def combine_ports(e_l: float, e_r: float, n_l: float, n_r: float) -> float:
    """Count-weighted average of the two detector ports' error rates."""
    total = n_l + n_r
    if total <= 0:
        raise ValueError("combine_ports needs n_l + n_r > 0")
    return (n_l * e_l + n_r * e_r) / total
