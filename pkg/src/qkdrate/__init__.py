"""Key-rate analysis for QKD protocols with phase postselection.

The package compares the plain window-averaged phase-error bound with
the sinc-tightened bound recovered from it, for the send-or-not-send
and mode-pairing protocol families over a modeled lossy channel, and
ships a brute-force density-matrix oracle that re-derives every closed
form used along the way.
"""

from .channel import ClickStatistics, arm_transmittance, mp_statistics, sns_statistics
from .decoy import (DecoyObservations, chernoff_lower, chernoff_upper,
                    eph_loose_sns, eph_precise_mp, eph_precise_sns,
                    s1_lower_bound)
from .mp import PairingOutcome, classify_pairs, key_rate_mp, pairing_rate
from .params import ChannelParams, FiniteKeyParams, MpParams, SnsParams
from .phase_error import (AffineSliceModel, PhaseErrorBounds, PhaseSlice,
                          binary_entropy, combine_ports, precise_from_loose,
                          sinc, slice_average, slice_value)
from .sns import KeyRateResult, aopp_simulate, key_rate, max_distance, untagged_fraction

__version__ = "0.1.0"
