"""Point prediction by empirical-loss minimization over synthetic samples.

Given m conditional draws from a generator, the point prediction for a loss
``l`` is ``argmin_v mean_k l(v, y_k)``. Squared, absolute and pinball losses
are minimized analytically over the reals; zero-one and medoid losses are
minimized over the sample set itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LOSS_KINDS = ("squared", "absolute", "pinball", "zero_one", "medoid")
DISSIMILARITIES = ("euclidean", "cosine")


@dataclass(frozen=True)
class SyntheticSampleSet:
    """The m conditional draws produced for one query point.

    ``samples`` is (m, d) float64 for continuous responses (original,
    de-standardized scale) or an (m,) integer array of category labels.
    """

    condition: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "condition", np.asarray(self.condition))
        samples = np.asarray(self.samples)
        if samples.ndim == 2 and samples.shape[0] < 1 or samples.ndim == 1 and samples.size < 1:
            raise ValueError("a sample set needs at least one draw")
        if samples.ndim not in (1, 2):
            raise ValueError("samples must be (m,) labels or (m, d) vectors")
        object.__setattr__(self, "samples", samples)

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @property
    def is_categorical(self) -> bool:
        return self.samples.ndim == 1 and np.issubdtype(self.samples.dtype, np.integer)


@dataclass(frozen=True)
class LossSpec:
    """A loss kind plus its minimizer strategy.

    ``alpha`` applies to pinball only and must lie in (0, 1); ``dissimilarity``
    applies to medoid only. Squared/absolute/pinball minimize over the
    continuous response space, zero-one and medoid search the sample set.
    """

    kind: str
    alpha: float | None = None
    dissimilarity: str | None = None
    minimizer_domain: str = field(init=False)

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}, expected one of {LOSS_KINDS}")
        if self.kind == "pinball":
            if self.alpha is None or not 0.0 < float(self.alpha) < 1.0:
                raise ValueError("pinball alpha must lie strictly in (0, 1)")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.alpha is not None:
            raise ValueError(f"alpha is only meaningful for pinball loss, not {self.kind!r}")
        if self.kind == "medoid":
            dis = self.dissimilarity or "euclidean"
            if dis not in DISSIMILARITIES:
                raise ValueError(f"unknown dissimilarity {dis!r}, expected one of {DISSIMILARITIES}")
            object.__setattr__(self, "dissimilarity", dis)
        elif self.dissimilarity is not None:
            raise ValueError("dissimilarity is only meaningful for medoid loss")
        domain = "sample_set" if self.kind in ("zero_one", "medoid") else "continuous"
        object.__setattr__(self, "minimizer_domain", domain)

    @classmethod
    def parse(cls, text: str) -> "LossSpec":
        """Parse ``squared | absolute | pinball:<a> | zero_one | medoid:<dissim>``."""
        name, _, arg = text.partition(":")
        name = name.strip()
        if name == "pinball":
            try:
                alpha = float(arg)
            except ValueError:
                raise ValueError(f"pinball needs a numeric alpha, got {arg!r}") from None
            return cls("pinball", alpha=alpha)
        if name == "medoid":
            return cls("medoid", dissimilarity=arg or None)
        if arg:
            raise ValueError(f"loss {name!r} takes no argument")
        return cls(name)


@dataclass(frozen=True)
class Prediction:
    """A point prediction with its achieved empirical loss."""

    value: np.ndarray | int
    loss_value: float
    m_used: int


def _as_samples(samples) -> np.ndarray:
    arr = samples.samples if isinstance(samples, SyntheticSampleSet) else np.asarray(samples)
    if arr.ndim == 0 or arr.shape[0] < 1:
        raise ValueError("empty sample set")
    return arr


def _continuous_matrix(arr) -> np.ndarray:
    mat = np.asarray(arr, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat[:, None]
    return mat


def _pairwise_dissimilarity(mat: np.ndarray, kind: str) -> np.ndarray:
    if kind == "euclidean":
        diff = mat[:, None, :] - mat[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))
    norms = np.sqrt(np.sum(mat * mat, axis=1))
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    cos = (mat @ mat.T) / np.outer(safe, safe)
    d = 1.0 - np.clip(cos, -1.0, 1.0)
    # a zero vector has no direction: maximally dissimilar to anything nonzero
    d[zero, :] = 1.0
    d[:, zero] = 1.0
    d[np.ix_(zero, zero)] = 0.0
    np.fill_diagonal(d, 0.0)
    return d


def _dissimilarity_to(value: np.ndarray, mat: np.ndarray, kind: str) -> np.ndarray:
    if kind == "euclidean":
        diff = mat - value[None, :]
        return np.sqrt(np.sum(diff * diff, axis=1))
    vn = float(np.sqrt(value @ value))
    norms = np.sqrt(np.sum(mat * mat, axis=1))
    both_zero = (norms == 0.0) & (vn == 0.0)
    either_zero = (norms == 0.0) | (vn == 0.0)
    safe = np.where(norms == 0.0, 1.0, norms) * (vn if vn > 0 else 1.0)
    d = 1.0 - np.clip((mat @ value) / safe, -1.0, 1.0)
    d[either_zero] = 1.0
    d[both_zero] = 0.0
    return d


def empirical_loss(loss: LossSpec, value, samples) -> float:
    """Mean of ``l(value, y_k)`` over the sample set; the quantity gdp_point minimizes."""
    arr = _as_samples(samples)
    if loss.kind == "zero_one":
        return float(np.mean(np.asarray(arr) != value))
    mat = _continuous_matrix(arr)
    if loss.kind == "medoid":
        v = np.atleast_1d(np.asarray(value, dtype=np.float64))
        return float(np.mean(_dissimilarity_to(v, mat, loss.dissimilarity)))
    v = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if v.shape[0] != mat.shape[1]:
        raise ValueError(f"value has dimension {v.shape[0]}, samples have {mat.shape[1]}")
    diff = mat - v[None, :]
    if loss.kind == "squared":
        return float(np.mean(np.sum(diff * diff, axis=1)))
    if loss.kind == "absolute":
        return float(np.mean(np.sum(np.abs(diff), axis=1)))
    # pinball: alpha-weighted underprediction, (1-alpha)-weighted overprediction
    a = loss.alpha
    per = np.where(diff >= 0, a * diff, (a - 1.0) * diff)
    return float(np.mean(np.sum(per, axis=1)))


def _pinball_order_index(alpha: float, m: int) -> int:
    """1-based order-statistic index ceil(alpha * m), guarded against float fuzz."""
    r = math.ceil(alpha * m - 1e-12 * m)
    return min(max(r, 1), m)


def gdp_point(samples, loss: LossSpec) -> Prediction:
    """Minimize the empirical loss over the synthetic sample set.

    Squared loss yields the per-coordinate mean, absolute the per-coordinate
    median, pinball(alpha) the per-coordinate order statistic ceil(alpha*m),
    zero-one the modal label (ties to the smallest label), and medoid the
    sample with minimal average dissimilarity to the set (ties to the lowest
    index after a lexicographic sort, so the result is permutation invariant).
    """
    arr = _as_samples(samples)
    categorical = np.issubdtype(arr.dtype, np.integer) and arr.ndim == 1
    if loss.kind == "zero_one":
        if not categorical:
            raise ValueError("zero_one loss requires categorical samples")
        labels, counts = np.unique(arr, return_counts=True)
        value = int(labels[np.argmax(counts)])
        return Prediction(value, empirical_loss(loss, value, arr), arr.shape[0])
    if categorical:
        raise ValueError(f"{loss.kind} loss requires continuous samples")
    mat = _continuous_matrix(arr)
    # canonical row order makes every reduction permutation invariant, bitwise
    mat = mat[np.lexsort(mat.T[::-1])]
    m = mat.shape[0]
    if loss.kind == "squared":
        value = mat.mean(axis=0)
    elif loss.kind == "absolute":
        value = np.median(mat, axis=0)
    elif loss.kind == "pinball":
        r = _pinball_order_index(loss.alpha, m)
        value = np.sort(mat, axis=0)[r - 1]
    else:  # medoid
        d = _pairwise_dissimilarity(mat, loss.dissimilarity)
        value = mat[int(np.argmin(d.mean(axis=1)))].copy()
    if arr.ndim == 1:
        value = float(value[0])
    return Prediction(value, empirical_loss(loss, value, mat), m)


def gdp_quantiles(samples, alphas) -> list[Prediction]:
    """Pinball predictions for several quantile levels from one shared sample set."""
    alphas = [float(a) for a in np.atleast_1d(alphas)]
    arr = _as_samples(samples)
    if np.issubdtype(np.asarray(arr).dtype, np.integer) and np.asarray(arr).ndim == 1:
        raise ValueError("quantile prediction requires continuous samples")
    mat = _continuous_matrix(arr)
    sorted_mat = np.sort(mat, axis=0)
    m = mat.shape[0]
    scalar = np.asarray(arr).ndim == 1
    out = []
    for a in alphas:
        spec = LossSpec("pinball", alpha=a)
        value = sorted_mat[_pinball_order_index(a, m) - 1]
        if scalar:
            value = float(value[0])
        out.append(Prediction(value, empirical_loss(spec, value, mat), m))
    return out
