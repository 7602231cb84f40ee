"""Shared fixtures: trained toy generators are expensive, so build them once
per session and reuse them across module tests and the acceptance suite."""

import numpy as np
import pytest

from gdpredict.discrete import sample_discrete, train_discrete
from gdpredict.gaussian import TrainConfig, sample_chains
from gdpredict.transfer import pretrain_source

TOY_SEED = 7
TOY_N = 5000
TOY_CONFIG = TrainConfig(width=64, depth=3, embed_dim=16, time_dim=16,
                         batch_size=512, learning_rate=1e-4,
                         max_epochs=1200, patience=80)
TOY_PROBES = np.array([[-1.0], [-0.5], [0.0], [0.5], [1.0]])

MIXTURE_PROBS = np.array([0.2, 0.3, 0.5])
MIXTURE_X = np.array([0.3, -0.2])


def linear_toy_data(n=TOY_N, seed=101):
    """The linear-Gaussian toy: y | x ~ N(2x, 1), x standard normal."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    y = 2.0 * x + rng.standard_normal(n)
    return x, y


def toy_oracle_draws(x_value, n_draws, rng):
    return 2.0 * x_value + rng.standard_normal(n_draws)


@pytest.fixture(scope="session")
def toy_generator():
    """Conditional diffusion trained on the linear-Gaussian toy at n=5000."""
    x, y = linear_toy_data()
    return pretrain_source(x, y, TOY_CONFIG, seed=TOY_SEED)


@pytest.fixture(scope="session")
def toy_probe_draws(toy_generator):
    """(5, 2000, 1) samples at the five fixed probe conditions, stride 1."""
    streams = np.random.SeedSequence(55).spawn(len(TOY_PROBES))
    return sample_chains(toy_generator, TOY_PROBES, m=2000, stride=1,
                         rngs=[np.random.default_rng(s) for s in streams])


@pytest.fixture(scope="session")
def mixture_generator():
    """Discrete generator for 3 classes with probabilities (0.2, 0.3, 0.5),
    independent of the predictors."""
    rng = np.random.default_rng(202)
    n = 20000
    x = rng.standard_normal((n, 2))
    labels = rng.choice(3, size=n, p=MIXTURE_PROBS)
    cfg = TrainConfig(width=256, depth=2, embed_dim=16, time_dim=16,
                      batch_size=512, learning_rate=1e-4,
                      max_epochs=200, patience=50)
    return train_discrete(x, labels, cfg, seed=5)


@pytest.fixture(scope="session")
def mixture_samples(mixture_generator):
    return sample_discrete(mixture_generator, MIXTURE_X, m=5000,
                           rng=np.random.default_rng(9))
