"""Tolerance table and run settings.

Defaults ship in ``tolerances.json``.  A user JSON file (``--config``) and
environment variables ``CMCT_<KEY>`` (e.g. ``CMCT_Z_SCAN=-1e-7``) override
them, in that order.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from importlib import resources

ENV_PREFIX = "CMCT_"


@dataclass(frozen=True)
class Config:
    geometric: float = 1e-10
    closure: float = 1e-8
    finite_difference: float = 1e-5
    z_scan: float = -1e-6
    first_integral: float = 1e-10
    simons: float = 1e-9
    fd_step: float = 1e-4
    pair_budget: int = 1_000_000
    seed: int = 0
    nu_per_period: int = 128
    nv: int = 256

    def replace(self, **changes) -> "Config":
        merged = asdict(self)
        merged.update({k: v for k, v in changes.items() if v is not None})
        return _coerce(merged)

    def as_dict(self) -> dict:
        return asdict(self)


def _coerce(values: dict) -> Config:
    known = {f.name: f for f in fields(Config)}
    unknown = set(values) - set(known)
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    out = {}
    for name, value in values.items():
        typ = int if known[name].type in ("int", int) else float
        out[name] = typ(float(value)) if typ is int else typ(value)
    return Config(**out)


def default_values() -> dict:
    text = resources.files(__package__).joinpath("tolerances.json").read_text()
    return json.loads(text)


def load_config(path=None, environ=None) -> Config:
    """Defaults <- JSON file at ``path`` <- ``CMCT_*`` environment variables."""
    values = default_values()
    if path is not None:
        with open(path) as fh:
            values.update(json.load(fh))
    env = os.environ if environ is None else environ
    for f in fields(Config):
        key = ENV_PREFIX + f.name.upper()
        if key in env:
            values[f.name] = env[key]
    return _coerce(values)
