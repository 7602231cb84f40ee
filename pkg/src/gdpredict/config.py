"""Run configuration: simulation settings plus training hyperparameters.

A run config is a flat JSON document. Unknown keys are rejected with a
diagnostic naming the key, so typos never silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import json

from .gaussian import TrainConfig
from .simbench import SimConfig

_SIM_FIELDS = {f.name for f in dataclasses.fields(SimConfig)}
_TRAIN_FIELDS = {f.name for f in dataclasses.fields(TrainConfig)}
KNOWN_KEYS = _SIM_FIELDS | _TRAIN_FIELDS


def parse_run_config(doc: dict) -> tuple[SimConfig, TrainConfig]:
    """Split a flat config mapping into (SimConfig, TrainConfig)."""
    if not isinstance(doc, dict):
        raise ValueError("run config must be a JSON object")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise ValueError(f"unknown config key: {unknown[0]!r}")
    sim_kwargs = {k: v for k, v in doc.items() if k in _SIM_FIELDS}
    train_kwargs = {k: v for k, v in doc.items() if k in _TRAIN_FIELDS}
    if "alphas" in sim_kwargs:
        sim_kwargs["alphas"] = tuple(sim_kwargs["alphas"])
    return SimConfig(**sim_kwargs), TrainConfig(**train_kwargs)


def load_run_config(path) -> tuple[SimConfig, TrainConfig]:
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from None
    return parse_run_config(doc)
