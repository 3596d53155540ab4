"""Derivative-free parameter search for the key-rate engines.

Nelder-Mead on unconstrained coordinates: probabilities go through a
logit, intensities through a log, and window widths through a scaled
logit, so box constraints never bind explicitly.  A few randomized
restarts guard against the simplex collapsing in a flat region, and the
warm start is never lost: the returned point is at least as good.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.optimize import minimize

from .params import ChannelParams, MpParams, SnsParams

__all__ = ["SNS_VARIABLES", "MP_VARIABLES", "optimize_params"]


def _logit(p, lo=0.0, hi=1.0):
    x = (p - lo) / (hi - lo)
    x = min(max(x, 1e-12), 1 - 1e-12)
    return math.log(x / (1.0 - x))


def _expit(u, lo=0.0, hi=1.0):
    return lo + (hi - lo) / (1.0 + math.exp(-u))


class _Var:
    def __init__(self, name, kind, lo=None, hi=None):
        self.name = name
        self.kind = kind
        self.lo = lo
        self.hi = hi

    def encode(self, value):
        if self.kind == "log":
            return math.log(max(value, 1e-12))
        return _logit(value, self.lo, self.hi)

    def decode(self, u):
        if self.kind == "log":
            return math.exp(min(u, 5.0))
        return _expit(u, self.lo, self.hi)


SNS_VARIABLES = {
    "send_prob": _Var("send_prob", "box", 1e-4, 0.9),
    "signal_intensity": _Var("signal_intensity", "box", 1e-4, 2.0),
    "mu1": _Var("mu1", "box", 1e-3, 2.0),
    "nu": _Var("nu", "box", 1e-5, 0.5),
    "slice_full_width": _Var("slice_full_width", "box", 1e-3, 0.95 * math.pi),
    "z_fraction": _Var("z_fraction", "box", 0.01, 0.99),
}

MP_VARIABLES = {
    "mu": _Var("mu", "box", 1e-3, 2.0),
    "nu": _Var("nu", "box", 1e-4, 0.8),
    "slice_width": _Var("slice_width", "box", 1e-3, 0.95 * math.pi / 2),
}

_DEFAULT_VARS = {
    "sns": ("send_prob", "signal_intensity", "mu1", "slice_full_width"),
    "mp": ("mu", "slice_width"),
}


def _replace(params, names, values):
    updates = dict(zip(names, values))
    # keep the decoy ordering constraint satisfiable while exploring
    if isinstance(params, SnsParams):
        hi = updates.get("mu1", params.mu1)
        if updates.get("nu", params.nu) >= hi:
            updates["nu"] = hi / 2.0
    elif isinstance(params, MpParams):
        hi = updates.get("mu", params.mu)
        if updates.get("nu", params.nu) >= hi:
            updates["nu"] = hi / 2.0
    return dataclasses.replace(params, **updates)


def optimize_params(rate_fn, params, variables=None, seed=0, restarts=3,
                    maxiter=200, xatol=1e-3, fatol=1e-12):
    """Maximize ``rate_fn(params)`` over the named protocol variables.

    Returns (best_params, best_rate).  ``rate_fn`` takes a protocol
    parameter record and returns the scalar to maximize.  The warm start
    (the incoming ``params``) is kept whenever the search fails to beat it.
    """
    if isinstance(params, SnsParams):
        table = SNS_VARIABLES
        default = _DEFAULT_VARS["sns"]
    elif isinstance(params, MpParams):
        table = MP_VARIABLES
        default = _DEFAULT_VARS["mp"]
    else:
        raise TypeError(f"unsupported parameter record {type(params)!r}")
    names = tuple(variables) if variables else default
    unknown = [n for n in names if n not in table]
    if unknown:
        raise ValueError(f"unknown optimization variables {unknown}")
    specs = [table[n] for n in names]

    def objective(u):
        try:
            candidate = _replace(params, names, [s.decode(v) for s, v in zip(specs, u)])
            return -rate_fn(candidate)
        except ValueError:
            return 0.0

    rng = np.random.default_rng(seed)
    x0 = np.array([s.encode(getattr(params, n)) for s, n in zip(specs, names)])
    best_u = x0
    best_val = objective(x0)
    for k in range(restarts):
        start = x0 if k == 0 else best_u + rng.normal(0.0, 0.5, size=len(x0))
        res = minimize(objective, start, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": xatol,
                                "fatol": fatol})
        if res.fun < best_val:
            best_val = res.fun
            best_u = res.x
    best_params = _replace(params, names,
                           [s.decode(v) for s, v in zip(specs, best_u)])
    best_rate = -best_val
    warm_rate = rate_fn(params)
    if warm_rate > best_rate:
        return params, warm_rate
    return best_params, best_rate
