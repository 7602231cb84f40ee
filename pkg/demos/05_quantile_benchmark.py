"""A reduced run of the heteroscedastic quantile-regression benchmark.

Simulates the nonlinear single-index model with noise scale driven by the
second predictor, trains a conditional generator on the 70% split, reads all
five quantile levels off shared synthetic sample sets, and scores them
against the closed-form conditional quantiles. The full-size protocol
(n=10000, p=100, m=1000) lives in tests/test_acceptance.py.

Run:
    python demos/05_quantile_benchmark.py
"""

import time

import numpy as np

from gdpredict import SimConfig, TrainConfig, run_benchmark

config = SimConfig(n=3000, p=20, case="I", seed=1, m=400, test_subset=60, stride=20)
train_config = TrainConfig(width=64, depth=3, embed_dim=32, time_dim=16,
                           batch_size=128, max_epochs=400, patience=60)

print("running reduced benchmark (n=3000, p=20) ...")
start = time.time()
result = run_benchmark(config, train_config)
print(f"done in {time.time() - start:.0f}s\n")
print(result.table())
print("note the U shape: tail quantiles are harder than the median.")
