"""Conditional Gaussian diffusion for continuous tabular responses.

The forward chain progressively mixes a standardized response with white
noise on a variance-preserving schedule; a noise-prediction network, fed the
noisy response, a learned condition embedding of the predictors and a
sinusoidal timestep embedding, is trained by mean squared error against the
injected noise. Synthetic responses are drawn by ancestral reversal of the
chain, optionally visiting only every ``stride``-th step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import AdamState, Mlp, as_generator, time_embed
from .prediction import SyntheticSampleSet


@dataclass(frozen=True)
class NoiseSchedule:
    """Discretization of the forward noising process.

    ``beta`` rises linearly between two rates; ``alpha_bar`` is the running
    product of ``1 - beta`` and fixes the signal/noise mix at each step:
    ``mu = sqrt(alpha_bar)``, ``sigma = sqrt(1 - alpha_bar)``, with
    ``mu**2 + sigma**2 == 1`` at every step.
    """

    n_steps: int
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    beta_min: float
    beta_max: float

    @classmethod
    def linear(cls, n_steps: int = 1000, beta_min: float = 1e-4, beta_max: float = 0.02):
        if n_steps < 1:
            raise ValueError("n_steps must be positive")
        beta = np.linspace(beta_min, beta_max, n_steps)
        if np.any(beta <= 0.0) or np.any(beta >= 1.0):
            raise ValueError("per-step rates must lie strictly in (0, 1)")
        if np.any(np.diff(beta) < 0):
            raise ValueError("per-step rates must be non-decreasing")
        alpha = 1.0 - beta
        return cls(
            n_steps=n_steps,
            beta=beta,
            alpha=alpha,
            alpha_bar=np.cumprod(alpha),
            beta_min=float(beta_min),
            beta_max=float(beta_max),
        )

    @property
    def mu(self) -> np.ndarray:
        return np.sqrt(self.alpha_bar)

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(1.0 - self.alpha_bar)

    def check_step(self, t):
        t_arr = np.asarray(t)
        if not np.issubdtype(t_arr.dtype, np.integer):
            raise ValueError("step t must be integer")
        if np.any(t_arr < 1) or np.any(t_arr > self.n_steps):
            raise ValueError(f"step t must lie in [1, {self.n_steps}]")
        return t_arr


@dataclass(frozen=True)
class Standardizer:
    """Per-column location/scale for predictors and responses."""

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray) -> "Standardizer":
        y_std = y.std(axis=0)
        if np.any(y_std == 0.0):
            cols = np.flatnonzero(y_std == 0.0)
            raise ValueError(f"response column(s) {cols.tolist()} have zero variance")
        x_std = x.std(axis=0)
        # constant predictors carry no signal; map them to zero instead of inf
        x_std = np.where(x_std == 0.0, 1.0, x_std)
        return cls(x.mean(axis=0), x_std, y.mean(axis=0), y_std)

    def transform_x(self, x):
        return (x - self.x_mean) / self.x_std

    def transform_y(self, y):
        return (y - self.y_mean) / self.y_std

    def inverse_y(self, y):
        return y * self.y_std + self.y_mean


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters (diffusion defaults for the tabular benchmark)."""

    batch_size: int = 512
    learning_rate: float = 1e-4
    max_epochs: int = 200
    patience: int = 20
    width: int = 128
    depth: int = 3
    embed_dim: int = 64
    time_dim: int = 16
    val_fraction: float = 0.1
    n_steps: int = 1000
    beta_min: float = 1e-4
    beta_max: float = 0.02
    restore_best: bool = True


@dataclass
class TrainingHistory:
    train_loss: list
    val_loss: list
    best_epoch: int
    epochs_run: int


class ConditionalGenerator:
    """A trained conditional sampler for continuous responses.

    Holds the noise-prediction network, the condition embedder, the noise
    schedule and the standardization statistics. Immutable after training;
    ``sample`` may be called concurrently with independent generators.
    """

    kind = "gaussian"

    def __init__(self, score_net: Mlp, embedder: Mlp, schedule: NoiseSchedule,
                 standardizer: Standardizer, time_dim: int, meta: dict | None = None):
        d_y = score_net.layer_dims[-1]
        d_h = embedder.layer_dims[-1]
        if score_net.layer_dims[0] != d_y + d_h + time_dim:
            raise ValueError("network input width must equal d_y + embed_dim + time_dim")
        self.score_net = score_net
        self.embedder = embedder
        self.schedule = schedule
        self.standardizer = standardizer
        self.time_dim = int(time_dim)
        self.meta = dict(meta or {})
        self.history: TrainingHistory | None = None

    @property
    def d_y(self) -> int:
        return self.score_net.layer_dims[-1]

    @property
    def n_predictors(self) -> int:
        return self.embedder.layer_dims[0]

    def embed_condition(self, x_std):
        return self.embedder.forward(x_std)

    def predict_noise(self, y_noisy, cond_embed, t):
        """Noise estimate for standardized noisy responses at step(s) t."""
        y_noisy = np.atleast_2d(np.asarray(y_noisy, dtype=np.float64))
        cond = np.atleast_2d(np.asarray(cond_embed, dtype=np.float64))
        n = y_noisy.shape[0]
        t_arr = np.broadcast_to(np.asarray(t), (n,))
        te = time_embed(t_arr, self.schedule.n_steps, self.time_dim)
        if cond.shape[0] == 1 and n > 1:
            cond = np.broadcast_to(cond, (n, cond.shape[1]))
        return self.score_net.forward(np.concatenate([y_noisy, cond, te], axis=1))

    def sample(self, x_new, m: int, stride: int = 1, rng=None) -> SyntheticSampleSet:
        """Draw m synthetic responses at one query point; see ``sample_chains``."""
        x_new = np.asarray(x_new, dtype=np.float64).reshape(-1)
        draws = sample_chains(self, x_new[None, :], m, stride, [as_generator(rng)])
        return SyntheticSampleSet(condition=x_new, samples=draws[0])


def sample_chains(gen: ConditionalGenerator, conditions: np.ndarray, m: int,
                  stride: int = 1, rngs=None) -> np.ndarray:
    """Ancestral sampling of m chains for each of C query points at once.

    Starts every chain at white noise and reverses the schedule along the
    visited steps T, T-stride, ..., stride; the final step omits the noise
    injection. Each condition owns its own generator stream, so results do
    not depend on how conditions are batched. Returns (C, m, d_y) responses
    on the original scale.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    T = gen.schedule.n_steps
    stride = int(stride)
    if stride < 1 or T % stride != 0:
        raise ValueError(f"stride must divide the {T}-step schedule evenly")
    conditions = np.atleast_2d(np.asarray(conditions, dtype=np.float64))
    n_cond = conditions.shape[0]
    if conditions.shape[1] != gen.n_predictors:
        raise ValueError(
            f"condition has {conditions.shape[1]} predictors, generator expects {gen.n_predictors}"
        )
    rngs = [as_generator(r) for r in rngs]
    if len(rngs) != n_cond:
        raise ValueError("need one generator stream per condition")

    x_std = gen.standardizer.transform_x(conditions)
    cond = np.repeat(gen.embedder.forward(x_std), m, axis=0)
    d_y = gen.d_y
    y = np.concatenate([r.standard_normal((m, d_y)) for r in rngs], axis=0)
    alpha_bar = gen.schedule.alpha_bar
    for t in range(T, 0, -stride):
        t_prev = t - stride
        ab_t = alpha_bar[t - 1]
        ab_prev = 1.0 if t_prev == 0 else alpha_bar[t_prev - 1]
        alpha_eff = ab_t / ab_prev
        beta_eff = 1.0 - alpha_eff
        eps_hat = gen.predict_noise(y, cond, t)
        y = (y - (beta_eff / np.sqrt(1.0 - ab_t)) * eps_hat) / np.sqrt(alpha_eff)
        if t_prev > 0:
            z = np.concatenate([r.standard_normal((m, d_y)) for r in rngs], axis=0)
            y += np.sqrt(beta_eff) * z
    out = gen.standardizer.inverse_y(y)
    return out.reshape(n_cond, m, d_y)


def forward_noise(y0, t, schedule: NoiseSchedule, rng=None, noise=None):
    """One forward jump: ``y_t = sqrt(alpha_bar_t) y0 + sqrt(1-alpha_bar_t) eps``.

    ``y0`` is a standardized response vector (d,) or batch (n, d); ``t`` is a
    step in [1, T], scalar or per-row. Returns (y_t, eps). Pass ``noise`` to
    pin the injected noise instead of drawing it from ``rng``.
    """
    y0 = np.asarray(y0, dtype=np.float64)
    t_arr = schedule.check_step(t)
    if noise is None:
        noise = as_generator(rng).standard_normal(y0.shape)
    else:
        noise = np.asarray(noise, dtype=np.float64)
        if noise.shape != y0.shape:
            raise ValueError("noise shape must match y0")
    ab = schedule.alpha_bar[np.asarray(t_arr) - 1]
    if y0.ndim == 2 and np.ndim(ab) == 1:
        ab = ab[:, None]
    y_t = np.sqrt(ab) * y0 + np.sqrt(1.0 - ab) * noise
    return y_t, noise


def score_matching_loss(gen: ConditionalGenerator, y0, x, rng) -> float:
    """Noise-prediction MSE on a standardized batch, steps drawn uniformly.

    For each row a step t is sampled uniformly on {1..T} and fresh noise is
    injected; the loss is the mean over rows of ``||eps - eps_hat||^2``.
    """
    y0 = np.atleast_2d(np.asarray(y0, dtype=np.float64))
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if y0.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    rng = as_generator(rng)
    t = rng.integers(1, gen.schedule.n_steps + 1, size=y0.shape[0])
    y_t, eps = forward_noise(y0, t, gen.schedule, rng)
    pred = gen.predict_noise(y_t, gen.embed_condition(x), t)
    resid = pred - eps
    return float(np.mean(np.sum(resid * resid, axis=1)))


def _noise_mse_and_grads(score_net, embedder, y0, x, t, eps, schedule, time_dim,
                         want_grads=True):
    """Shared training kernel: loss plus parameter gradients for both nets."""
    idx = t - 1
    ab = schedule.alpha_bar[idx][:, None]
    y_t = np.sqrt(ab) * y0 + np.sqrt(1.0 - ab) * eps
    emb, emb_cache = embedder.forward_cached(x)
    te = time_embed(t, schedule.n_steps, time_dim)
    inp = np.concatenate([y_t, emb, te], axis=1)
    pred, cache = score_net.forward_cached(inp)
    resid = pred - eps
    loss = float(np.mean(np.sum(resid * resid, axis=1)))
    if not want_grads:
        return loss, None, None
    g = (2.0 / y0.shape[0]) * resid
    s_wg, s_bg, d_inp = score_net.backward(inp, g, cache)
    d_y = y0.shape[1]
    d_emb = d_inp[:, d_y:d_y + emb.shape[1]]
    e_wg, e_bg, _ = embedder.backward(x, d_emb, emb_cache)
    return loss, _interleave(s_wg, s_bg), _interleave(e_wg, e_bg)


def _interleave(weight_grads, bias_grads):
    out = []
    for w, b in zip(weight_grads, bias_grads):
        out.append(w)
        out.append(b)
    return out


def _stratified_steps(rng, n: int, n_steps: int) -> np.ndarray:
    """Draw n steps with uniform per-draw marginal but stratified coverage.

    Each draw lands in its own equal slice of [1, n_steps] and the slices are
    shuffled across rows, which keeps every row marginally uniform on
    {1..n_steps} while cutting the batch gradient variance.
    """
    edges = np.linspace(0.0, float(n_steps), n + 1)
    u = edges[:-1] + rng.random(n) * (edges[1:] - edges[:-1])
    t = np.minimum(u.astype(np.int64) + 1, n_steps)
    return rng.permutation(t)


def _snapshot(net: Mlp):
    return [p.copy() for p in net.parameters()]


def _fit(score_net: Mlp, embedder: Mlp, x, y, config: TrainConfig, seed_seq,
         schedule: NoiseSchedule, standardizer: Standardizer | None,
         update_embedder: bool = True):
    """Early-stopped Adam training of the noise-prediction pair.

    Rows are shuffled once under the run seed; the last ``val_fraction`` of
    them form the validation split, whose noise draws are pinned so the
    validation loss is a deterministic function of the weights. Restores the
    best-validation weights on exit. Returns (standardizer, history).
    """
    ss_order, ss_noise, ss_val = seed_seq.spawn(3)
    rng_order = np.random.default_rng(ss_order)
    rng_noise = np.random.default_rng(ss_noise)
    rng_val = np.random.default_rng(ss_val)

    n = x.shape[0]
    perm = rng_order.permutation(n)
    n_val = min(n - 1, max(1, int(round(n * config.val_fraction))))
    tr_idx, val_idx = perm[: n - n_val], perm[n - n_val:]
    if standardizer is None:
        standardizer = Standardizer.fit(x[tr_idx], y[tr_idx])
    x_tr = standardizer.transform_x(x[tr_idx])
    y_tr = standardizer.transform_y(y[tr_idx])
    x_val = standardizer.transform_x(x[val_idx])
    y_val = standardizer.transform_y(y[val_idx])

    # pin several noise/step replicates per validation row so the early
    # stopping signal is a deterministic, low-variance function of the weights
    n_rep = 8
    x_val_rep = np.tile(x_val, (n_rep, 1))
    y_val_rep = np.tile(y_val, (n_rep, 1))
    t_val = _stratified_steps(rng_val, x_val_rep.shape[0], schedule.n_steps)
    eps_val = rng_val.standard_normal(y_val_rep.shape)

    adam_score = AdamState(score_net.parameters(), learning_rate=config.learning_rate)
    adam_embed = AdamState(embedder.parameters(), learning_rate=config.learning_rate)

    def val_loss():
        loss, _, _ = _noise_mse_and_grads(
            score_net, embedder, y_val_rep, x_val_rep, t_val, eps_val,
            schedule, config.time_dim, want_grads=False)
        return loss

    best_val = val_loss()
    best_score = _snapshot(score_net)
    best_embed = _snapshot(embedder)
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
            eps = rng_noise.standard_normal((len(rows), y_tr.shape[1]))
            loss, s_grads, e_grads = _noise_mse_and_grads(
                score_net, embedder, y_tr[rows], x_tr[rows], t, eps,
                schedule, config.time_dim)
            score_net.set_parameters(adam_score.step(score_net.parameters(), s_grads))
            if update_embedder:
                embedder.set_parameters(adam_embed.step(embedder.parameters(), e_grads))
            running += loss * len(rows)
        history.train_loss.append(running / n_tr)
        v = val_loss()
        history.val_loss.append(v)
        history.epochs_run = epoch
        if v < best_val:
            best_val = v
            best_score = _snapshot(score_net)
            best_embed = _snapshot(embedder)
            best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                break
    if config.restore_best:
        score_net.set_parameters(best_score)
        embedder.set_parameters(best_embed)
        history.best_epoch = best_epoch
        return standardizer, history, best_val
    history.best_epoch = history.epochs_run
    return standardizer, history, history.val_loss[-1] if history.val_loss else best_val


def _prepare_xy(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("predictors and responses must be row-aligned 2-D arrays")
    if x.shape[0] < 2:
        raise ValueError("training needs at least two rows")
    return x, y


def train(x, y, config: TrainConfig | None = None, seed: int = 0) -> ConditionalGenerator:
    """Fit a conditional diffusion generator on (x, y) rows.

    Builds the condition embedder and noise-prediction network, then trains
    both jointly with Adam under early stopping on a held-out validation
    split. Fully deterministic for a given seed.
    """
    config = config or TrainConfig()
    x, y = _prepare_xy(x, y)
    if np.any(y.std(axis=0) == 0.0):
        cols = np.flatnonzero(y.std(axis=0) == 0.0)
        raise ValueError(f"response column(s) {cols.tolist()} have zero variance")
    root = np.random.SeedSequence(seed)
    ss_init, ss_fit = root.spawn(2)
    rng_init = np.random.default_rng(ss_init)
    schedule = NoiseSchedule.linear(config.n_steps, config.beta_min, config.beta_max)
    d_y = y.shape[1]
    embedder = Mlp([x.shape[1], config.width, config.embed_dim], rng_init)
    score_net = Mlp(
        [d_y + config.embed_dim + config.time_dim] + [config.width] * config.depth + [d_y],
        rng_init,
    )
    standardizer, history, best_val = _fit(
        score_net, embedder, x, y, config, ss_fit, schedule, None)
    gen = ConditionalGenerator(
        score_net, embedder, schedule, standardizer, config.time_dim,
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
