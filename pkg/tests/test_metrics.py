import itertools

import numpy as np
import pytest
from scipy.stats import wasserstein_distance as scipy_w1

from gdpredict.metrics import MetricReport, accuracy, kappa, mad, rmse, wasserstein1_1d


class TestRmseMad:
    def test_zero_when_equal(self):
        v = np.array([1.0, -2.0, 3.0])
        assert rmse(v, v) == 0.0
        assert mad(v, v) == 0.0

    def test_unit_errors(self):
        assert rmse([1.0, -1.0], [0.0, 0.0]) == pytest.approx(1.0)
        assert mad([1.0, -1.0], [0.0, 0.0]) == pytest.approx(1.0)

    def test_hand_arithmetic(self):
        # residuals {0, 3}: rmse sqrt(4.5), mad 1.5
        assert rmse([0.0, 3.0], [0.0, 0.0]) == pytest.approx(np.sqrt(4.5))
        assert mad([0.0, 3.0], [0.0, 0.0]) == pytest.approx(1.5)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rmse([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            mad([], [])

    def test_rmse_dominates_mad(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = rng.standard_normal(int(rng.integers(1, 30)))
            t = rng.standard_normal(p.size)
            assert rmse(p, t) >= mad(p, t) >= 0.0


class TestKappa:
    def test_perfect_agreement(self):
        assert kappa([0, 1, 2, 1], [0, 1, 2, 1]) == pytest.approx(1.0)

    def test_two_by_two_hand_value(self):
        # confusion counts [[20, 5], [10, 15]]: p_o = 0.7, p_e = 0.5, kappa = 0.4
        truth = [0] * 25 + [1] * 25
        pred = [0] * 20 + [1] * 5 + [0] * 10 + [1] * 15
        assert kappa(pred, truth) == pytest.approx(0.4)

    def test_chance_level_near_zero(self):
        rng = np.random.default_rng(1)
        p = rng.integers(0, 4, size=100000)
        t = rng.integers(0, 4, size=100000)
        assert abs(kappa(p, t)) < 0.02

    def test_constant_equal_raters_convention(self):
        assert kappa([3, 3, 3], [3, 3, 3]) == 0.0

    def test_self_agreement_non_constant(self):
        x = np.array([0, 1, 0, 2])
        assert kappa(x, x) == pytest.approx(1.0)

    def test_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(1, 30))
            p = rng.integers(0, 3, size=n)
            t = rng.integers(0, 3, size=n)
            k = kappa(p, t)
            assert -1.0 - 1e-12 <= k <= 1.0 + 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            kappa([], [])

    def test_accuracy(self):
        assert accuracy([1, 2, 3], [1, 0, 3]) == pytest.approx(2 / 3)


def permutation_w1(a, b):
    """Exhaustive coupling oracle for equal-size samples: extreme points of
    the transport polytope are permutation assignments."""
    best = np.inf
    for perm in itertools.permutations(range(len(b))):
        cost = np.mean([abs(a[i] - b[j]) for i, j in enumerate(perm)])
        best = min(best, cost)
    return best


class TestWasserstein:
    def test_identical_zero(self):
        v = np.array([0.3, -1.2, 4.0])
        assert wasserstein1_1d(v, v) == 0.0

    def test_point_masses(self):
        assert wasserstein1_1d([0.0], [1.0]) == pytest.approx(1.0)

    def test_two_point_coupling_oracle(self):
        a, b = np.array([0.0, 0.0]), np.array([0.0, 2.0])
        assert wasserstein1_1d(a, b) == pytest.approx(1.0)
        assert wasserstein1_1d(a, b) == pytest.approx(permutation_w1(a, b))

    def test_matches_permutation_oracle_on_small_samples(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            a = rng.standard_normal(n)
            b = rng.standard_normal(n)
            assert wasserstein1_1d(a, b) == pytest.approx(permutation_w1(a, b), abs=1e-12)

    def test_equal_sizes_sorted_mean(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal(200)
        b = rng.standard_normal(200)
        direct = np.mean(np.abs(np.sort(a) - np.sort(b)))
        assert wasserstein1_1d(a, b) == pytest.approx(direct, abs=1e-12)

    def test_unequal_sizes_match_reference(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = rng.standard_normal(int(rng.integers(1, 40)))
            b = rng.standard_normal(int(rng.integers(1, 40)))
            assert wasserstein1_1d(a, b) == pytest.approx(scipy_w1(a, b), abs=1e-12)

    def test_metric_axioms(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            a = rng.standard_normal(int(rng.integers(1, 15)))
            b = rng.standard_normal(int(rng.integers(1, 15)))
            c = rng.standard_normal(int(rng.integers(1, 15)))
            dab = wasserstein1_1d(a, b)
            dba = wasserstein1_1d(b, a)
            assert dab == pytest.approx(dba, abs=1e-12)
            assert dab >= 0.0
            assert dab <= wasserstein1_1d(a, c) + wasserstein1_1d(c, b) + 1e-9

    def test_zero_iff_equal_distribution(self):
        a = np.array([1.0, 2.0, 1.0])
        b = np.array([2.0, 1.0, 1.0])  # same empirical distribution
        assert wasserstein1_1d(a, b) == 0.0
        assert wasserstein1_1d(a, [1.0, 2.0, 1.5]) > 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            wasserstein1_1d([], [1.0])


class TestMetricReport:
    def test_average_is_mean_of_entries(self):
        rep = MetricReport("RMSE", {0.05: 1.3, 0.5: 0.8, 0.95: 1.4}, n=100)
        assert rep.average == pytest.approx((1.3 + 0.8 + 1.4) / 3, abs=1e-12)
        d = rep.as_dict()
        assert d["Average"] == rep.average
        assert d["0.05"] == 1.3
