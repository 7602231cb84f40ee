"""Conditional discrete diffusion over categorical responses.

Forward corruption resamples a label uniformly with a per-step probability;
compounded over t steps this keeps the original label with probability
``alpha_bar_t + (1 - alpha_bar_t)/K`` and otherwise spreads mass uniformly.
A network trained with cross-entropy to recover the clean label drives
ancestral reverse sampling through the exact one-step posterior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import (
    Standardizer,
    TrainConfig,
    TrainingHistory,
    _interleave,
    _prepare_xy,
    _stratified_steps,
)
from .nn import AdamState, Mlp, as_generator, time_embed
from .prediction import SyntheticSampleSet


@dataclass(frozen=True)
class DiscreteSchedule:
    """Uniform-transition corruption schedule over K categories.

    Each step keeps the label with probability ``1 - beta_t`` and otherwise
    resamples it uniformly over all K labels, so the implied K x K transition
    matrix is row-stochastic with a uniform stationary distribution.
    """

    n_steps: int
    beta: np.ndarray
    alpha_bar: np.ndarray
    n_categories: int
    beta_min: float
    beta_max: float

    @classmethod
    def linear(cls, n_categories: int, n_steps: int = 1000,
               beta_min: float = 1e-4, beta_max: float = 0.02):
        if n_categories < 1:
            raise ValueError("need at least one category")
        beta = np.linspace(beta_min, beta_max, n_steps)
        if np.any(beta <= 0.0) or np.any(beta >= 1.0):
            raise ValueError("per-step rates must lie strictly in (0, 1)")
        return cls(
            n_steps=n_steps,
            beta=beta,
            alpha_bar=np.cumprod(1.0 - beta),
            n_categories=int(n_categories),
            beta_min=float(beta_min),
            beta_max=float(beta_max),
        )

    def keep_probability(self, t) -> np.ndarray:
        """Probability that a label survives t compounded corruption steps."""
        ab = self.alpha_bar[np.asarray(t) - 1]
        return ab + (1.0 - ab) / self.n_categories

    def check_labels(self, labels) -> np.ndarray:
        labels = np.asarray(labels)
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("labels must be integers")
        if np.any(labels < 0) or np.any(labels >= self.n_categories):
            raise ValueError(f"labels must lie in [0, {self.n_categories - 1}]")
        return labels


def forward_corrupt(labels, t, schedule: DiscreteSchedule, rng) -> np.ndarray:
    """Apply t compounded corruption steps to labels, in closed form.

    Keeps each label with probability ``alpha_bar_t + (1 - alpha_bar_t)/K``
    and otherwise resamples uniformly over the remaining K-1 labels.
    """
    scalar = np.ndim(labels) == 0
    labels = schedule.check_labels(np.atleast_1d(labels))
    t_arr = np.asarray(t)
    if np.any(t_arr < 1) or np.any(t_arr > schedule.n_steps):
        raise ValueError(f"step t must lie in [1, {schedule.n_steps}]")
    rng = as_generator(rng)
    K = schedule.n_categories
    keep_prob = np.broadcast_to(schedule.keep_probability(t_arr), labels.shape)
    keep = rng.random(labels.shape) < keep_prob
    out = labels.copy()
    n_flip = int(np.count_nonzero(~keep))
    if n_flip and K > 1:
        other = rng.integers(0, K - 1, size=n_flip)
        other += other >= labels[~keep]
        out[~keep] = other
    return out[0] if scalar else out


def corrupt_one_step(labels, t, schedule: DiscreteSchedule, rng) -> np.ndarray:
    """A single forward transition at step t (resampling may hit the same label)."""
    labels = schedule.check_labels(np.atleast_1d(labels))
    if not 1 <= int(t) <= schedule.n_steps:
        raise ValueError(f"step t must lie in [1, {schedule.n_steps}]")
    rng = as_generator(rng)
    flip = rng.random(labels.shape) < schedule.beta[t - 1]
    out = labels.copy()
    n_flip = int(np.count_nonzero(flip))
    if n_flip:
        out[flip] = rng.integers(0, schedule.n_categories, size=n_flip)
    return out


def corruption_marginal(label: int, t: int, schedule: DiscreteSchedule) -> np.ndarray:
    """Exact distribution of the corrupted label after t steps."""
    K = schedule.n_categories
    ab = schedule.alpha_bar[t - 1]
    pmf = np.full(K, (1.0 - ab) / K)
    pmf[label] += ab
    return pmf


def _one_hot(labels, K):
    out = np.zeros((labels.shape[0], K))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


class DiscreteGenerator:
    """A trained conditional sampler for categorical responses."""

    kind = "discrete"

    def __init__(self, denoise_net: Mlp, embedder: Mlp, schedule: DiscreteSchedule,
                 standardizer: Standardizer, time_dim: int, meta: dict | None = None):
        K = schedule.n_categories
        d_h = embedder.layer_dims[-1]
        if denoise_net.layer_dims[0] != K + d_h + time_dim or denoise_net.layer_dims[-1] != K:
            raise ValueError("network must map one-hot label + embedding + time to K logits")
        self.denoise_net = denoise_net
        self.embedder = embedder
        self.schedule = schedule
        self.standardizer = standardizer
        self.time_dim = int(time_dim)
        self.meta = dict(meta or {})
        self.history: TrainingHistory | None = None

    @property
    def n_categories(self) -> int:
        return self.schedule.n_categories

    @property
    def n_predictors(self) -> int:
        return self.embedder.layer_dims[0]

    def embed_condition(self, x_std):
        return self.embedder.forward(x_std)

    def predict_clean_probs(self, noisy_labels, cond_embed, t):
        """Softmax distribution over the clean label given a corrupted one."""
        noisy_labels = np.atleast_1d(noisy_labels)
        n = noisy_labels.shape[0]
        cond = np.atleast_2d(cond_embed)
        if cond.shape[0] == 1 and n > 1:
            cond = np.broadcast_to(cond, (n, cond.shape[1]))
        t_arr = np.broadcast_to(np.asarray(t), (n,))
        te = time_embed(t_arr, self.schedule.n_steps, self.time_dim)
        inp = np.concatenate([_one_hot(noisy_labels, self.n_categories), cond, te], axis=1)
        return np.exp(_log_softmax(self.denoise_net.forward(inp)))

    def sample(self, x_new, m: int, rng=None) -> SyntheticSampleSet:
        return sample_discrete(self, x_new, m, rng)


def sample_discrete(gen: DiscreteGenerator, x_new, m: int, rng=None) -> SyntheticSampleSet:
    """Ancestral reverse sampling of m labels at one query point.

    Chains start uniform over the K categories (the stationary law of the
    corruption chain) and walk the exact one-step posterior, mixing the
    predicted clean-label distribution with the corruption kernel.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = as_generator(rng)
    x_new = np.asarray(x_new, dtype=np.float64).reshape(-1)
    if x_new.shape[0] != gen.n_predictors:
        raise ValueError(
            f"condition has {x_new.shape[0]} predictors, generator expects {gen.n_predictors}"
        )
    K = gen.n_categories
    schedule = gen.schedule
    cond = gen.embed_condition(gen.standardizer.transform_x(x_new)[None, :])
    labels = rng.integers(0, K, size=m)
    rows = np.arange(m)
    for t in range(schedule.n_steps, 0, -1):
        probs0 = gen.predict_clean_probs(labels, cond, t)
        beta_t = schedule.beta[t - 1]
        ab_t = schedule.alpha_bar[t - 1]
        ab_prev = 1.0 if t == 1 else schedule.alpha_bar[t - 2]
        # evidence of x_t under each candidate clean label c
        z = np.full((m, K), (1.0 - ab_t) / K)
        z[rows, labels] += ab_t
        w = probs0 / z
        mix = ab_prev * w + ((1.0 - ab_prev) / K) * w.sum(axis=1, keepdims=True)
        kernel = np.full((m, K), beta_t / K)
        kernel[rows, labels] += 1.0 - beta_t
        post = kernel * mix
        post /= post.sum(axis=1, keepdims=True)
        u = rng.random(m)
        labels = (np.cumsum(post, axis=1) < u[:, None]).sum(axis=1)
        labels = np.minimum(labels, K - 1)
    return SyntheticSampleSet(condition=x_new, samples=labels.astype(np.int64))


def _cross_entropy_and_grads(denoise_net, embedder, labels0, labels_t, x, t,
                             schedule, time_dim, want_grads=True):
    K = schedule.n_categories
    emb, emb_cache = embedder.forward_cached(x)
    te = time_embed(t, schedule.n_steps, time_dim)
    inp = np.concatenate([_one_hot(labels_t, K), emb, te], axis=1)
    logits, cache = denoise_net.forward_cached(inp)
    logp = _log_softmax(logits)
    n = labels0.shape[0]
    loss = float(-logp[np.arange(n), labels0].mean())
    if not want_grads:
        return loss, None, None
    g = (np.exp(logp) - _one_hot(labels0, K)) / n
    d_wg, d_bg, d_inp = denoise_net.backward(inp, g, cache)
    d_emb = d_inp[:, K:K + emb.shape[1]]
    e_wg, e_bg, _ = embedder.backward(x, d_emb, emb_cache)
    return loss, _interleave(d_wg, d_bg), _interleave(e_wg, e_bg)


def _check_training_labels(labels) -> tuple[np.ndarray, int]:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be a 1-D integer array")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.floor(labels)):
            raise ValueError("labels must be integers")
        labels = labels.astype(np.int64)
    if np.any(labels < 0):
        raise ValueError("labels must be non-negative")
    uniq = np.unique(labels)
    K = int(labels.max()) + 1
    if len(uniq) != K:
        missing = sorted(set(range(K)) - set(uniq.tolist()))
        raise ValueError(f"labels must be 0-based contiguous integers; missing {missing}")
    return labels.astype(np.int64), K


def _fit_discrete(denoise_net, embedder, x, labels, config, seed_seq, schedule,
                  standardizer, update_embedder=True):
    """Cross-entropy training loop; mirrors the continuous trainer."""
    ss_order, ss_noise, ss_val = seed_seq.spawn(3)
    rng_order = np.random.default_rng(ss_order)
    rng_noise = np.random.default_rng(ss_noise)
    rng_val = np.random.default_rng(ss_val)

    n = x.shape[0]
    perm = rng_order.permutation(n)
    n_val = min(n - 1, max(1, int(round(n * config.val_fraction))))
    tr_idx, val_idx = perm[: n - n_val], perm[n - n_val:]
    if standardizer is None:
        x_std_tr = x[tr_idx].std(axis=0)
        standardizer = Standardizer(
            x[tr_idx].mean(axis=0),
            np.where(x_std_tr == 0.0, 1.0, x_std_tr),
            np.zeros(1), np.ones(1))
    x_tr = standardizer.transform_x(x[tr_idx])
    x_val = standardizer.transform_x(x[val_idx])
    lab_tr, lab_val = labels[tr_idx], labels[val_idx]

    n_rep = 8
    x_val_rep = np.tile(x_val, (n_rep, 1))
    lab_val_rep = np.tile(lab_val, n_rep)
    t_val = _stratified_steps(rng_val, lab_val_rep.shape[0], schedule.n_steps)
    lab_val_t = forward_corrupt(lab_val_rep, t_val, schedule, rng_val)

    adam_d = AdamState(denoise_net.parameters(), learning_rate=config.learning_rate)
    adam_e = AdamState(embedder.parameters(), learning_rate=config.learning_rate)

    def val_loss():
        loss, _, _ = _cross_entropy_and_grads(
            denoise_net, embedder, lab_val_rep, lab_val_t, x_val_rep, t_val,
            schedule, config.time_dim, want_grads=False)
        return loss

    best_val = val_loss()
    best_d = [p.copy() for p in denoise_net.parameters()]
    best_e = [p.copy() for p in embedder.parameters()]
    best_epoch = 0
    since_best = 0
    history = TrainingHistory([], [], 0, 0)
    n_tr = len(tr_idx)
    for epoch in range(1, config.max_epochs + 1):
        order = rng_order.permutation(n_tr)
        running = 0.0
        for start in range(0, n_tr, config.batch_size):
            rows = order[start:start + config.batch_size]
            t = _stratified_steps(rng_noise, len(rows), schedule.n_steps)
            lab_t = forward_corrupt(lab_tr[rows], t, schedule, rng_noise)
            loss, d_grads, e_grads = _cross_entropy_and_grads(
                denoise_net, embedder, lab_tr[rows], lab_t, x_tr[rows], t,
                schedule, config.time_dim)
            denoise_net.set_parameters(adam_d.step(denoise_net.parameters(), d_grads))
            if update_embedder:
                embedder.set_parameters(adam_e.step(embedder.parameters(), e_grads))
            running += loss * len(rows)
        history.train_loss.append(running / n_tr)
        v = val_loss()
        history.val_loss.append(v)
        history.epochs_run = epoch
        if v < best_val:
            best_val, best_epoch, since_best = v, epoch, 0
            best_d = [p.copy() for p in denoise_net.parameters()]
            best_e = [p.copy() for p in embedder.parameters()]
        else:
            since_best += 1
            if since_best >= config.patience:
                break
    denoise_net.set_parameters(best_d)
    embedder.set_parameters(best_e)
    history.best_epoch = best_epoch
    return standardizer, history, best_val


def train_discrete(x, labels, config: TrainConfig | None = None, seed: int = 0) -> DiscreteGenerator:
    """Fit a conditional discrete diffusion generator on (x, label) rows."""
    config = config or TrainConfig()
    labels_arr, K = _check_training_labels(labels)
    x, _ = _prepare_xy(x, np.zeros((labels_arr.shape[0], 1)))
    root = np.random.SeedSequence(seed)
    ss_init, ss_fit = root.spawn(2)
    rng_init = np.random.default_rng(ss_init)
    schedule = DiscreteSchedule.linear(K, config.n_steps, config.beta_min, config.beta_max)
    embedder = Mlp([x.shape[1], config.width, config.embed_dim], rng_init)
    denoise_net = Mlp(
        [K + config.embed_dim + config.time_dim] + [config.width] * config.depth + [K],
        rng_init,
    )
    standardizer, history, best_val = _fit_discrete(
        denoise_net, embedder, x, labels_arr, config, ss_fit, schedule, None)
    gen = DiscreteGenerator(
        denoise_net, embedder, schedule, standardizer, config.time_dim,
        meta={
            "role": "standalone",
            "seed": int(seed),
            "n_rows": int(x.shape[0]),
            "epochs_run": history.epochs_run,
            "best_epoch": history.best_epoch,
            "final_val_loss": best_val,
        },
    )
    gen.history = history
    return gen
