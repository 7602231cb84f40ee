"""JSON checkpoint persistence for trained generators.

Checkpoints are plain JSON: architecture, schedule parameters,
standardization statistics and weights, with floats encoded as their
shortest exact decimal text so a load/save round trip reproduces forward
passes bitwise.
"""

from __future__ import annotations

import json

import numpy as np

from .dataio import atomic_write
from .discrete import DiscreteGenerator, DiscreteSchedule
from .gaussian import ConditionalGenerator, NoiseSchedule, Standardizer
from .nn import Mlp

FORMAT_VERSION = 1


def _net_payload(net: Mlp) -> dict:
    return {
        "layer_dims": net.layer_dims,
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def _net_restore(payload: dict) -> Mlp:
    net = Mlp.zeros(payload["layer_dims"])
    net.weights = [np.asarray(w, dtype=np.float64) for w in payload["weights"]]
    net.biases = [np.asarray(b, dtype=np.float64) for b in payload["biases"]]
    for w, b, (i, o) in zip(net.weights, net.biases, zip(net.layer_dims[:-1], net.layer_dims[1:])):
        if w.shape != (i, o) or b.shape != (o,):
            raise ValueError("checkpoint weights do not match declared layer dims")
    return net


def save_checkpoint(gen, path) -> None:
    """Serialize a trained generator (gaussian or discrete) to JSON."""
    if isinstance(gen, ConditionalGenerator):
        kind = "gaussian"
        main_net = gen.score_net
        schedule = {
            "n_steps": gen.schedule.n_steps,
            "beta_min": gen.schedule.beta_min,
            "beta_max": gen.schedule.beta_max,
        }
    elif isinstance(gen, DiscreteGenerator):
        kind = "discrete"
        main_net = gen.denoise_net
        schedule = {
            "n_steps": gen.schedule.n_steps,
            "beta_min": gen.schedule.beta_min,
            "beta_max": gen.schedule.beta_max,
            "n_categories": gen.schedule.n_categories,
        }
    else:
        raise ValueError(f"cannot checkpoint object of type {type(gen).__name__}")
    std = gen.standardizer
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "role": gen.meta.get("role", "standalone"),
        "time_dim": gen.time_dim,
        "schedule": schedule,
        "standardizer": {
            "x_mean": std.x_mean.tolist(),
            "x_std": std.x_std.tolist(),
            "y_mean": std.y_mean.tolist(),
            "y_std": std.y_std.tolist(),
        },
        "network": _net_payload(main_net),
        "embedder": _net_payload(gen.embedder),
        "training": {k: gen.meta.get(k) for k in
                     ("seed", "n_rows", "epochs_run", "best_epoch", "final_val_loss")},
    }
    if "label_map" in gen.meta:
        doc["label_map"] = gen.meta["label_map"]
    with atomic_write(path) as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")


def load_checkpoint(path):
    """Restore a generator from JSON; rejects unknown format versions."""
    with open(path) as handle:
        doc = json.load(handle)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format_version {version!r}, expected {FORMAT_VERSION}")
    std_doc = doc["standardizer"]
    standardizer = Standardizer(
        np.asarray(std_doc["x_mean"], dtype=np.float64),
        np.asarray(std_doc["x_std"], dtype=np.float64),
        np.asarray(std_doc["y_mean"], dtype=np.float64),
        np.asarray(std_doc["y_std"], dtype=np.float64),
    )
    meta = dict(doc.get("training") or {})
    meta["role"] = doc.get("role", "standalone")
    if "label_map" in doc:
        meta["label_map"] = doc["label_map"]
    sched = doc["schedule"]
    kind = doc.get("kind")
    if kind == "gaussian":
        schedule = NoiseSchedule.linear(sched["n_steps"], sched["beta_min"], sched["beta_max"])
        return ConditionalGenerator(
            _net_restore(doc["network"]), _net_restore(doc["embedder"]),
            schedule, standardizer, doc["time_dim"], meta=meta)
    if kind == "discrete":
        schedule = DiscreteSchedule.linear(
            sched["n_categories"], sched["n_steps"], sched["beta_min"], sched["beta_max"])
        return DiscreteGenerator(
            _net_restore(doc["network"]), _net_restore(doc["embedder"]),
            schedule, standardizer, doc["time_dim"], meta=meta)
    raise ValueError(f"unknown generator kind {kind!r}")
