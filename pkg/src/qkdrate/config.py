"""Strict JSON run configuration.

Unknown keys are rejected everywhere: a typo in a physics parameter must
fail loudly, not silently fall back to a default.  Defaults follow the
two protocols' standard simulation parameter sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .params import ChannelParams, FiniteKeyParams, MpParams, SnsParams

__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Configuration file failed validation."""


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    channel: ChannelParams
    sns: SnsParams | None
    mp: MpParams | None
    scan: tuple  # (d_min, d_max, step) in km
    mode: str = "both"
    optimize: bool = False
    optimize_variables: tuple = ()
    seed: int = 0
    output: str | None = None

    @property
    def protocol_params(self):
        return self.sns if self.protocol == "sns" else self.mp


_CHANNEL_DEFAULTS = {
    "sns": dict(detector_efficiency=0.30, dark_count=1e-8,
                misalign_x=0.05, misalign_z=0.005,
                loss_coeff_db_per_km=0.2),
    "mp": dict(detector_efficiency=0.70, dark_count=1e-7,
               misalign_x=0.05, misalign_z=0.005,
               loss_coeff_db_per_km=0.2),
}

_SCAN_DEFAULTS = {"sns": (0.0, 460.0, 20.0), "mp": (0.0, 420.0, 20.0)}


def _take(mapping: dict, context: str, known: dict) -> dict:
    unknown = set(mapping) - set(known)
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in {context}; "
            f"allowed: {sorted(known)}"
        )
    merged = dict(known)
    merged.update(mapping)
    return merged


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded JSON document into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a JSON object")
    top = _take(data, "top level", {
        "schema_version": SCHEMA_VERSION,
        "protocol": None,
        "channel": {},
        "protocol_params": {},
        "finite_key": {},
        "scan": {},
        "mode": "both",
        "optimize": False,
        "optimize_variables": None,
        "seed": 0,
        "output": None,
    })
    if top["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {top['schema_version']!r}; "
            f"expected {SCHEMA_VERSION}")
    protocol = top["protocol"]
    if protocol not in ("sns", "mp"):
        raise ConfigError(f"protocol must be 'sns' or 'mp', got {protocol!r}")
    if top["mode"] not in ("loose", "precise", "both"):
        raise ConfigError(f"mode must be loose|precise|both, got {top['mode']!r}")

    chan_kwargs = _take(top["channel"], "channel", dict(
        distance_km=0.0, **_CHANNEL_DEFAULTS[protocol]))
    try:
        channel = ChannelParams(**chan_kwargs)
    except ValueError as exc:
        raise ConfigError(f"channel: {exc}") from exc

    fin_defaults = (dict(total_rounds=1e12, epsilon=1e-20,
                         security_level=4.66e-9, ec_inefficiency=1.1,
                         enabled=True)
                    if protocol == "sns" else
                    dict(total_rounds=1e13, epsilon=1e-23,
                         security_level=1e-10, ec_inefficiency=1.1,
                         enabled=True))
    fin_kwargs = _take(top["finite_key"], "finite_key", fin_defaults)
    try:
        finite = FiniteKeyParams(**fin_kwargs)
    except ValueError as exc:
        raise ConfigError(f"finite_key: {exc}") from exc

    sns = mp = None
    try:
        if protocol == "sns":
            defaults = SnsParams(finite=finite)
            kwargs = _take(top["protocol_params"], "protocol_params", dict(
                send_prob=defaults.send_prob,
                signal_intensity=defaults.signal_intensity,
                mu1=defaults.mu1,
                nu=defaults.nu,
                slice_full_width=defaults.slice_full_width,
                z_fraction=defaults.z_fraction,
                decoy_probs=list(defaults.decoy_probs),
                aopp_enabled=defaults.aopp_enabled,
            ))
            kwargs["decoy_probs"] = tuple(kwargs["decoy_probs"])
            sns = SnsParams(finite=finite, **kwargs)
        else:
            defaults = MpParams(finite=finite)
            kwargs = _take(top["protocol_params"], "protocol_params", dict(
                mu=defaults.mu,
                nu=defaults.nu,
                intensity_probs=list(defaults.intensity_probs),
                max_pair_interval=defaults.max_pair_interval,
                slice_width=defaults.slice_width,
            ))
            kwargs["intensity_probs"] = tuple(kwargs["intensity_probs"])
            mp = MpParams(finite=finite, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"protocol_params: {exc}") from exc

    d_min, d_max, step = _SCAN_DEFAULTS[protocol]
    scan_kwargs = _take(top["scan"], "scan",
                        dict(d_min=d_min, d_max=d_max, step=step))
    scan = (float(scan_kwargs["d_min"]), float(scan_kwargs["d_max"]),
            float(scan_kwargs["step"]))
    if scan[0] > scan[1]:
        raise ConfigError(f"scan: d_min {scan[0]} exceeds d_max {scan[1]}")
    if scan[2] <= 0:
        raise ConfigError(f"scan: step must be positive, got {scan[2]}")

    variables = top["optimize_variables"]
    return RunConfig(
        protocol=protocol,
        channel=channel,
        sns=sns,
        mp=mp,
        scan=scan,
        mode=top["mode"],
        optimize=bool(top["optimize"]),
        optimize_variables=tuple(variables) if variables else (),
        seed=int(top["seed"]),
        output=top["output"],
    )


def load_config(path) -> RunConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)
