"""One synthetic sample set, many point predictions.

The same m conditional draws answer different prediction questions: the mean
minimizes squared loss, the median absolute loss, any quantile its pinball
loss, and the medoid a pairwise dissimilarity. Nothing is retrained between
questions; only the loss changes.

Run:
    python demos/02_one_generator_many_losses.py
"""

import numpy as np

from gdpredict import LossSpec, gdp_point, gdp_quantiles

# stand-in for generator output: a skewed conditional distribution
rng = np.random.default_rng(5)
samples = rng.gamma(shape=2.0, scale=1.5, size=1000)

print(f"sample set: m={samples.size}, mean={samples.mean():.3f}, "
      f"median={np.median(samples):.3f}\n")

for text in ("squared", "absolute", "pinball:0.05", "pinball:0.95"):
    spec = LossSpec.parse(text)
    pred = gdp_point(samples, spec)
    print(f"{text:>14}: value={pred.value:8.4f}  empirical loss={pred.loss_value:.4f}")

print("\nall five benchmark quantiles from the same draws:")
for alpha, pred in zip((0.05, 0.2, 0.5, 0.8, 0.95),
                       gdp_quantiles(samples, (0.05, 0.2, 0.5, 0.8, 0.95))):
    print(f"  alpha={alpha:4.2f}: {pred.value:8.4f}")

print("\nmedoid selection over vector candidates:")
vectors = rng.standard_normal((7, 3))
pred = gdp_point(vectors, LossSpec.parse("medoid:euclidean"))
print(f"  chose {np.round(pred.value, 3)} with mean dissimilarity {pred.loss_value:.3f}")
