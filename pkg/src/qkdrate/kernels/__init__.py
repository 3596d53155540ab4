"""Pairing-scan kernel with a compiled core and a pure-python fallback.

The compiled extension is preferred when importable; set the environment
variable ``QKDRATE_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and by tests that compare the two).
"""

from __future__ import annotations

import os

from . import py_impl

if os.environ.get("QKDRATE_PURE_PYTHON"):
    pair_clicks = py_impl.pair_clicks
    BACKEND = "python"
else:
    try:
        from ._pairing_cy import pair_clicks

        BACKEND = "cython"
    except ImportError:
        pair_clicks = py_impl.pair_clicks
        BACKEND = "python"

__all__ = ["pair_clicks", "py_impl", "BACKEND"]
