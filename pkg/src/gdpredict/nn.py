"""Dense feed-forward networks with manual backpropagation.

Small float64 MLPs (ReLU hidden layers, identity output), an Adam optimizer
with bias correction, and a sinusoidal timestep embedding. Everything runs on
numpy; randomness always comes from an explicit seeded generator.
"""

from __future__ import annotations

import numpy as np


def as_generator(rng) -> np.random.Generator:
    """Coerce an int seed / SeedSequence / Generator into a numpy Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or numpy Generator is required")
    return np.random.default_rng(rng)


def relu(x):
    return np.maximum(x, 0.0)


class Mlp:
    """Fully connected network: ReLU on hidden layers, identity on the output.

    Weights are stored as (fan_in, fan_out) float64 matrices so a batch of
    inputs with shape (n, d_in) flows through as ``x @ W + b``. Hidden-layer
    weights start Glorot-uniform, biases start at zero.
    """

    def __init__(self, layer_dims, rng):
        dims = [int(d) for d in layer_dims]
        if len(dims) < 2 or any(d <= 0 for d in dims):
            raise ValueError(f"layer_dims needs at least two positive entries, got {layer_dims!r}")
        rng = as_generator(rng)
        self.layer_dims = dims
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @classmethod
    def zeros(cls, layer_dims) -> "Mlp":
        """All-zero network; handy for hand-built fixtures."""
        net = cls.__new__(cls)
        dims = [int(d) for d in layer_dims]
        if len(dims) < 2 or any(d <= 0 for d in dims):
            raise ValueError(f"layer_dims needs at least two positive entries, got {layer_dims!r}")
        net.layer_dims = dims
        net.weights = [np.zeros((i, o)) for i, o in zip(dims[:-1], dims[1:])]
        net.biases = [np.zeros(o) for o in dims[1:]]
        return net

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "Mlp":
        net = Mlp.zeros(self.layer_dims)
        net.weights = [w.copy() for w in self.weights]
        net.biases = [b.copy() for b in self.biases]
        return net

    def parameters(self):
        """Flat list of parameter arrays, weights then biases per layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def set_parameters(self, params):
        for i in range(self.n_layers):
            self.weights[i] = np.asarray(params[2 * i], dtype=np.float64)
            self.biases[i] = np.asarray(params[2 * i + 1], dtype=np.float64)

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.layer_dims[0]:
            raise ValueError(
                f"input has width {x.shape[-1]}, network expects {self.layer_dims[0]}"
            )
        return x, squeeze

    def forward(self, x):
        """Evaluate the network on a vector (d_in,) or a batch (n, d_in)."""
        out, _ = self.forward_cached(np.asarray(x, dtype=np.float64))
        return out if np.asarray(x).ndim > 1 else out[0]

    def forward_cached(self, x):
        """Forward pass returning (output, post-activation cache) for backprop."""
        x2, _ = self._check_input(x)
        acts = [x2]
        h = x2
        for i in range(self.n_layers):
            h = h @ self.weights[i] + self.biases[i]
            if i < self.n_layers - 1:
                h = relu(h)
            acts.append(h)
        return acts[-1], acts

    def backward(self, x, output_gradient, cache=None):
        """Backpropagate a loss gradient through the network.

        ``output_gradient`` holds dL/d(output) row-per-example; returned weight
        and bias gradients are summed over the batch. Also returns dL/d(input)
        with the same shape as ``x``.
        """
        x2, squeeze = self._check_input(x)
        g = np.asarray(output_gradient, dtype=np.float64)
        if squeeze:
            g = g[None, :]
        if g.shape != (x2.shape[0], self.layer_dims[-1]):
            raise ValueError(
                f"output_gradient shape {g.shape} does not match "
                f"({x2.shape[0]}, {self.layer_dims[-1]})"
            )
        if cache is None:
            _, cache = self.forward_cached(x2)
        weight_grads = [None] * self.n_layers
        bias_grads = [None] * self.n_layers
        for i in range(self.n_layers - 1, -1, -1):
            weight_grads[i] = cache[i].T @ g
            bias_grads[i] = g.sum(axis=0)
            g = g @ self.weights[i].T
            if i > 0:
                g = g * (cache[i] > 0)
        input_grad = g[0] if squeeze else g
        return weight_grads, bias_grads, input_grad


class AdamState:
    """Adam optimizer state over a list of parameter arrays.

    Moments start at zero; ``step_count`` increases by one per update. The
    update uses the standard bias-corrected first/second moment estimates.
    """

    def __init__(self, params, learning_rate=1e-4, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)
        self.step_count = 0
        self.first_moment = [np.zeros_like(p) for p in params]
        self.second_moment = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        """Apply one Adam update; returns the new parameter arrays."""
        if len(params) != len(self.first_moment):
            raise ValueError("parameter count does not match optimizer state")
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1 ** t
        c2 = 1.0 - self.beta2 ** t
        new_params = []
        for i, (p, g) in enumerate(zip(params, grads)):
            g = np.asarray(g, dtype=np.float64)
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
            m = self.first_moment[i]
            v = self.second_moment[i]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            new_params.append(p - self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.epsilon))
        return new_params


def adam_step(params, grads, state: AdamState):
    """Functional wrapper: one Adam update, returns (new_params, state)."""
    return state.step(params, grads), state


def time_embed(t, n_steps, dim):
    """Sinusoidal embedding of a diffusion timestep.

    The step index is normalized by ``n_steps`` and projected onto a geometric
    frequency ladder spanning [1, 1e4]; the embedding concatenates the sines
    and cosines. Accepts a scalar step or an array of steps and returns shape
    (dim,) or (len(t), dim). Every coordinate lies in [-1, 1].
    """
    dim = int(dim)
    if dim <= 0 or dim % 2 != 0:
        raise ValueError(f"embedding dim must be a positive even integer, got {dim}")
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0) or np.any(t_arr > n_steps):
        raise ValueError(f"step must lie in [0, {n_steps}]")
    half = dim // 2
    if half == 1:
        freqs = np.ones(1)
    else:
        freqs = 10000.0 ** (np.arange(half) / (half - 1))
    phase = np.multiply.outer(t_arr / n_steps, freqs)
    return np.concatenate([np.sin(phase), np.cos(phase)], axis=-1)
