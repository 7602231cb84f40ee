"""Evaluation metrics: RMSE, MAD, accuracy, Cohen's kappa, 1-D Wasserstein."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _paired(pred, truth):
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise ValueError("empty input")
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    return p, t


def rmse(pred, truth) -> float:
    p, t = _paired(pred, truth)
    return float(np.sqrt(np.mean((p - t) ** 2)))


def mad(pred, truth) -> float:
    p, t = _paired(pred, truth)
    return float(np.mean(np.abs(p - t)))


def accuracy(pred, truth) -> float:
    p = np.asarray(pred).reshape(-1)
    t = np.asarray(truth).reshape(-1)
    if p.size == 0 or p.shape != t.shape:
        raise ValueError("inputs must be equal-length and nonempty")
    return float(np.mean(p == t))


def kappa(pred, truth) -> float:
    """Cohen's kappa: agreement beyond chance, (p_o - p_e) / (1 - p_e).

    Chance agreement p_e comes from the product of the two marginal label
    distributions. Returns 0 by convention when p_e == 1 (both raters
    constant and equal).
    """
    p = np.asarray(pred).reshape(-1)
    t = np.asarray(truth).reshape(-1)
    if p.size == 0 or p.shape != t.shape:
        raise ValueError("inputs must be equal-length and nonempty")
    labels = np.unique(np.concatenate([p, t]))
    n = p.size
    p_o = float(np.mean(p == t))
    p_marg = np.array([np.mean(p == c) for c in labels])
    t_marg = np.array([np.mean(t == c) for c in labels])
    p_e = float(p_marg @ t_marg)
    if p_e >= 1.0:
        return 0.0
    return (p_o - p_e) / (1.0 - p_e)


def wasserstein1_1d(sample_a, sample_b) -> float:
    """Exact 1-D empirical Wasserstein-1 distance.

    Integrates |F_a - F_b| over the pooled support, which equals the L1
    distance between the empirical quantile functions; for equal sizes this
    is the mean absolute difference of sorted order statistics. Works for
    unequal sample sizes directly, without resampling.
    """
    a = np.sort(np.asarray(sample_a, dtype=np.float64).reshape(-1))
    b = np.sort(np.asarray(sample_b, dtype=np.float64).reshape(-1))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    pooled = np.sort(np.concatenate([a, b]))
    deltas = np.diff(pooled)
    if deltas.size == 0:
        return 0.0
    cdf_a = np.searchsorted(a, pooled[:-1], side="right") / a.size
    cdf_b = np.searchsorted(b, pooled[:-1], side="right") / b.size
    return float(np.sum(np.abs(cdf_a - cdf_b) * deltas))


@dataclass(frozen=True)
class MetricReport:
    """Per-quantile values of one metric plus their average.

    ``values`` maps each quantile level to the metric; ``average`` is always
    the arithmetic mean of the per-level entries.
    """

    name: str
    values: dict
    n: int

    @property
    def average(self) -> float:
        vals = list(self.values.values())
        return float(sum(vals) / len(vals))

    def as_dict(self) -> dict:
        out = {f"{alpha:g}": v for alpha, v in self.values.items()}
        out["Average"] = self.average
        return out

    def row(self, fmt="{:.4f}") -> list:
        return [self.name] + [fmt.format(v) for v in self.values.values()] + [fmt.format(self.average)]
