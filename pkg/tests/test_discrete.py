import numpy as np
import pytest
from scipy.stats import chisquare

from gdpredict.discrete import (
    DiscreteSchedule,
    corrupt_one_step,
    corruption_marginal,
    forward_corrupt,
    sample_discrete,
    train_discrete,
)
from gdpredict.gaussian import TrainConfig

from conftest import MIXTURE_PROBS

FAST = TrainConfig(width=64, depth=2, embed_dim=16, time_dim=16, batch_size=512,
                   learning_rate=1e-4, max_epochs=300, patience=40)


class TestSchedule:
    def test_marginal_rows_are_distributions(self):
        s = DiscreteSchedule.linear(5)
        for t in (1, 10, 500, 1000):
            for label in range(5):
                pmf = corruption_marginal(label, t, s)
                assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
                assert np.all(pmf >= 0.0)

    def test_stationary_distribution_is_uniform(self):
        s = DiscreteSchedule.linear(5)
        pmf = corruption_marginal(2, 1000, s)
        assert np.max(np.abs(pmf - 0.2)) < 1e-4

    def test_first_step_keeps_label(self):
        s = DiscreteSchedule.linear(5)
        assert s.keep_probability(1) > 0.9999


class TestForwardCorrupt:
    def test_near_identity_at_first_step(self):
        s = DiscreteSchedule.linear(5)
        rng = np.random.default_rng(0)
        labels = np.full(100000, 3)
        out = forward_corrupt(labels, 1, s, rng)
        assert np.mean(out == 3) > 0.9995

    def test_terminal_step_is_uniform(self):
        s = DiscreteSchedule.linear(5)
        rng = np.random.default_rng(1)
        out = forward_corrupt(np.full(100000, 0), 1000, s, rng)
        freq = np.bincount(out, minlength=5) / 100000
        assert 0.5 * np.abs(freq - 0.2).sum() < 0.01

    def test_single_category_never_changes(self):
        s = DiscreteSchedule.linear(1)
        rng = np.random.default_rng(2)
        out = forward_corrupt(np.zeros(1000, dtype=np.int64), 1000, s, rng)
        assert np.all(out == 0)

    def test_label_out_of_range(self):
        s = DiscreteSchedule.linear(3)
        with pytest.raises(ValueError):
            forward_corrupt(np.array([3]), 10, s, np.random.default_rng(0))
        with pytest.raises(ValueError):
            forward_corrupt(np.array([-1]), 10, s, np.random.default_rng(0))

    @pytest.mark.parametrize("t", [10, 100, 1000])
    def test_closed_form_equals_sequential_chain(self, t):
        # chi-square goodness of fit at 1%: 1e5 sequential single-step walks
        # against the exact compounded marginal, and the closed-form sampler
        # against the same marginal
        K = 4
        s = DiscreteSchedule.linear(K)
        rng = np.random.default_rng(100 + t)
        start = 1
        seq = np.full(100000, start)
        for step in range(1, t + 1):
            seq = corrupt_one_step(seq, step, s, rng)
        expected = corruption_marginal(start, t, s) * 100000
        _, p_seq = chisquare(np.bincount(seq, minlength=K), expected)
        assert p_seq > 0.01
        closed = forward_corrupt(np.full(100000, start), t, s, np.random.default_rng(200 + t))
        _, p_closed = chisquare(np.bincount(closed, minlength=K), expected)
        assert p_closed > 0.01


class TestTrainDiscrete:
    def test_deterministic_mapping_recovered(self):
        # label is a deterministic function of a small discrete predictor
        rng = np.random.default_rng(303)
        x = rng.integers(0, 3, size=3000).astype(float)
        labels = (2 - x).astype(np.int64)
        gen = train_discrete(x.reshape(-1, 1), labels, FAST, seed=4)
        for xv in (0.0, 1.0, 2.0):
            sset = sample_discrete(gen, np.array([xv]), m=400,
                                   rng=np.random.default_rng(int(xv) + 10))
            mode = int(np.bincount(sset.samples, minlength=3).argmax())
            assert mode == int(2 - xv)
            assert np.mean(sset.samples == mode) > 0.95

    def test_uniform_labels_stay_uniform(self):
        rng = np.random.default_rng(404)
        x = rng.standard_normal((8000, 2))
        labels = rng.integers(0, 4, size=8000)
        gen = train_discrete(x, labels, FAST, seed=6)
        sset = sample_discrete(gen, np.array([0.5, 0.5]), m=3000,
                               rng=np.random.default_rng(11))
        freq = np.bincount(sset.samples, minlength=4) / 3000
        assert 0.5 * np.abs(freq - 0.25).sum() < 0.05

    def test_noncontiguous_labels_rejected(self):
        x = np.arange(10.0)
        with pytest.raises(ValueError, match="contiguous"):
            train_discrete(x, np.array([0, 2] * 5), TrainConfig(max_epochs=1), seed=0)

    def test_negative_labels_rejected(self):
        x = np.arange(10.0)
        with pytest.raises(ValueError, match="non-negative"):
            train_discrete(x, np.array([-1, 0] * 5), TrainConfig(max_epochs=1), seed=0)

    def test_same_seed_reproduces_weights_bitwise(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(200)
        labels = rng.integers(0, 2, size=200)
        cfg = TrainConfig(width=16, depth=2, embed_dim=8, time_dim=8,
                          batch_size=128, max_epochs=3, patience=3)
        a = train_discrete(x, labels, cfg, seed=12)
        b = train_discrete(x, labels, cfg, seed=12)
        for pa, pb in zip(a.denoise_net.parameters(), b.denoise_net.parameters()):
            assert np.array_equal(pa, pb)

    def test_logits_normalize(self, mixture_generator):
        probs = mixture_generator.predict_clean_probs(
            np.array([0, 1, 2]),
            mixture_generator.embed_condition(np.zeros((1, 2))), 500)
        assert np.all(np.abs(probs.sum(axis=1) - 1.0) < 1e-9)


class TestSampleDiscrete:
    def test_known_mixture_frequencies(self, mixture_samples):
        freq = np.bincount(mixture_samples.samples, minlength=3) / mixture_samples.m
        assert 0.5 * np.abs(freq - MIXTURE_PROBS).sum() < 0.05

    def test_labels_in_range(self, mixture_samples):
        assert mixture_samples.samples.min() >= 0
        assert mixture_samples.samples.max() <= 2

    def test_single_draw_and_determinism(self, mixture_generator):
        a = sample_discrete(mixture_generator, np.zeros(2), m=1,
                            rng=np.random.default_rng(5))
        assert a.m == 1 and 0 <= int(a.samples[0]) <= 2
        b = sample_discrete(mixture_generator, np.zeros(2), m=25,
                            rng=np.random.default_rng(5))
        c = sample_discrete(mixture_generator, np.zeros(2), m=25,
                            rng=np.random.default_rng(5))
        assert np.array_equal(b.samples, c.samples)

    def test_invalid_m(self, mixture_generator):
        with pytest.raises(ValueError):
            sample_discrete(mixture_generator, np.zeros(2), m=0,
                            rng=np.random.default_rng(0))
