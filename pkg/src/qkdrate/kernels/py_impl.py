"""Pure-python fallback for the click-train pairing scan."""

from __future__ import annotations

import numpy as np


def pair_clicks(clicks, max_interval):
    """Pair successive clicks no further apart than ``max_interval`` rounds.

    A held click that waits longer than the interval is discarded and the
    renewal restarts from the next click.  Returns (first, second) arrays
    of the paired click round indices.
    """
    clicks = np.asarray(clicks, dtype=np.int64)
    first = []
    second = []
    pending = -1
    for c in clicks.tolist():
        if pending < 0:
            pending = c
        elif c - pending <= max_interval:
            first.append(pending)
            second.append(c)
            pending = -1
        else:
            pending = c
    return (np.asarray(first, dtype=np.int64),
            np.asarray(second, dtype=np.int64))
