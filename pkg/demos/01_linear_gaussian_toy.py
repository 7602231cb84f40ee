"""Train a conditional diffusion generator on a linear-Gaussian toy task.

The data follow y | x ~ N(2x, 1). After training we draw synthetic responses
at a few query points and check the conditional mean, spread, and the
Wasserstein-1 distance against exact draws from the true conditional.

Run:
    python demos/01_linear_gaussian_toy.py
"""

import numpy as np

from gdpredict import TrainConfig, train, wasserstein1_1d

rng = np.random.default_rng(101)
n = 5000
x = rng.standard_normal(n)
y = 2.0 * x + rng.standard_normal(n)

print(f"training on {n} rows of y | x ~ N(2x, 1) ...")
config = TrainConfig(width=64, depth=3, embed_dim=16, time_dim=16,
                     max_epochs=400, patience=60)
generator = train(x, y, config, seed=7)
print(f"stopped after {generator.meta['epochs_run']} epochs "
      f"(best validation at epoch {generator.meta['best_epoch']})\n")

print(f"{'x':>5} {'mean':>8} {'2x':>6} {'sd':>6} {'W1':>6}")
for xv in (-1.0, -0.5, 0.0, 0.5, 1.0):
    sset = generator.sample(np.array([xv]), m=2000, rng=np.random.default_rng(55))
    draws = sset.samples[:, 0]
    oracle = 2.0 * xv + np.random.default_rng(77).standard_normal(2000)
    w1 = wasserstein1_1d(draws, oracle)
    print(f"{xv:5.1f} {draws.mean():8.3f} {2 * xv:6.1f} {draws.std():6.3f} {w1:6.3f}")
