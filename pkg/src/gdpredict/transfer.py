"""Transfer learning for conditional generators via shared embeddings.

A generator pretrained on a data-rich source task is adapted to a related
target task: the condition embedder (and standardization statistics) can be
frozen and reused, while the noise-prediction network is warm-started and
fine-tuned on the target rows. Freezing the embedder fixes the shared
representation; fine-tuning then only moves the task-specific parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .discrete import DiscreteGenerator, _fit_discrete
from .gaussian import ConditionalGenerator, TrainConfig, _fit, train
from .nn import Mlp


class TransferIncompatibleError(ValueError):
    """Source generator and target data do not line up dimensionally."""


@dataclass(frozen=True)
class TransferPlan:
    """How to adapt a pretrained source generator to a target task.

    With ``freeze_embedder`` the condition embedding stays bitwise fixed;
    with ``warm_start_score_net`` the target network starts from the source
    weights instead of a fresh initialization. ``target_epochs`` and
    ``target_lr`` override the base training settings.
    """

    source: ConditionalGenerator | DiscreteGenerator
    freeze_embedder: bool = True
    warm_start_score_net: bool = True
    target_epochs: int | None = None
    target_lr: float | None = None


def pretrain_source(x, y, config: TrainConfig | None = None, seed: int = 0) -> ConditionalGenerator:
    """Train a source generator; same contract as ``train``, tagged as source."""
    gen = train(x, y, config, seed=seed)
    gen.meta["role"] = "source"
    return gen


def _target_config(source_meta_config: TrainConfig | None, plan: TransferPlan) -> TrainConfig:
    cfg = source_meta_config or TrainConfig()
    if plan.target_epochs is not None:
        cfg = replace(cfg, max_epochs=int(plan.target_epochs))
    if plan.target_lr is not None:
        cfg = replace(cfg, learning_rate=float(plan.target_lr))
    return cfg


def finetune_target(plan: TransferPlan, x, y, config: TrainConfig | None = None,
                    seed: int = 0):
    """Fine-tune a copy of the source generator on target rows.

    The source standardizer is reused so frozen components keep their
    meaning; early stopping works as in base training. Returns a generator
    of the same kind as the source, tagged role="finetuned".
    """
    source = plan.source
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise ValueError("target dataset is empty")
    if x.ndim != 2 or x.shape[1] != source.n_predictors:
        raise TransferIncompatibleError(
            f"target data has {x.shape[1] if x.ndim == 2 else 1} predictors, "
            f"source expects {source.n_predictors}"
        )
    cfg = _target_config(config, plan)
    root = np.random.SeedSequence([int(seed), 1])
    ss_init, ss_fit = root.spawn(2)

    if isinstance(source, DiscreteGenerator):
        return _finetune_discrete(plan, source, x, y, cfg, ss_init, ss_fit, seed)

    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != x.shape[0]:
        raise ValueError("predictors and responses must be row-aligned")
    if y.shape[1] != source.d_y:
        raise TransferIncompatibleError(
            f"target responses have dimension {y.shape[1]}, source expects {source.d_y}"
        )
    score_net = source.score_net.copy() if plan.warm_start_score_net else Mlp(
        source.score_net.layer_dims, np.random.default_rng(ss_init))
    embedder = source.embedder.copy()
    cfg = replace(cfg, time_dim=source.time_dim)
    _, history, best_val = _fit(
        score_net, embedder, x, y, cfg, ss_fit, source.schedule,
        source.standardizer, update_embedder=not plan.freeze_embedder)
    gen = ConditionalGenerator(
        score_net, embedder, source.schedule, source.standardizer, source.time_dim,
        meta={
            "role": "finetuned",
            "seed": int(seed),
            "n_rows": int(x.shape[0]),
            "epochs_run": history.epochs_run,
            "best_epoch": history.best_epoch,
            "final_val_loss": best_val,
            "source_seed": source.meta.get("seed"),
        },
    )
    gen.history = history
    return gen


def _finetune_discrete(plan, source, x, labels, cfg, ss_init, ss_fit, seed):
    labels = np.asarray(labels)
    if labels.shape[0] != x.shape[0]:
        raise ValueError("predictors and labels must be row-aligned")
    if not np.issubdtype(labels.dtype, np.integer):
        labels = labels.astype(np.int64)
    if np.any(labels < 0) or np.any(labels >= source.n_categories):
        raise TransferIncompatibleError(
            f"target labels must lie in [0, {source.n_categories - 1}]")
    denoise = source.denoise_net.copy() if plan.warm_start_score_net else Mlp(
        source.denoise_net.layer_dims, np.random.default_rng(ss_init))
    embedder = source.embedder.copy()
    cfg = replace(cfg, time_dim=source.time_dim)
    _, history, best_val = _fit_discrete(
        denoise, embedder, x, labels.astype(np.int64), cfg, ss_fit,
        source.schedule, source.standardizer,
        update_embedder=not plan.freeze_embedder)
    gen = DiscreteGenerator(
        denoise, embedder, source.schedule, source.standardizer, source.time_dim,
        meta={
            "role": "finetuned",
            "seed": int(seed),
            "n_rows": int(x.shape[0]),
            "epochs_run": history.epochs_run,
            "best_epoch": history.best_epoch,
            "final_val_loss": best_val,
            "source_seed": source.meta.get("seed"),
        },
    )
    gen.history = history
    return gen
