import numpy as np
import pytest

from gdpredict.discrete import train_discrete
from gdpredict.gaussian import TrainConfig, train
from gdpredict.transfer import (
    TransferIncompatibleError,
    TransferPlan,
    finetune_target,
    pretrain_source,
)

from conftest import linear_toy_data

MICRO = TrainConfig(width=16, depth=2, embed_dim=8, time_dim=8,
                    batch_size=64, max_epochs=4, patience=4)


def micro_source(seed=0):
    x, y = linear_toy_data(n=250, seed=21)
    return pretrain_source(x, y, MICRO, seed=seed)


class TestPretrain:
    def test_metadata_records_role_and_size(self):
        gen = micro_source()
        assert gen.meta["role"] == "source"
        assert gen.meta["n_rows"] == 250

    def test_same_seed_byte_identical_weights(self):
        a, b = micro_source(3), micro_source(3)
        for pa, pb in zip(a.score_net.parameters(), b.score_net.parameters()):
            assert np.array_equal(pa, pb)

    def test_toy_fixture_is_source_tagged(self, toy_generator):
        # the session toy generator doubles as the source-reproduction check
        assert toy_generator.meta["role"] == "source"


class TestFinetune:
    def test_frozen_embedder_is_bitwise_unchanged(self):
        source = micro_source()
        x, y = linear_toy_data(n=120, seed=22)
        tuned = finetune_target(TransferPlan(source), x, y, MICRO, seed=1)
        for pa, pb in zip(source.embedder.parameters(), tuned.embedder.parameters()):
            assert np.array_equal(pa, pb)
        assert tuned.meta["role"] == "finetuned"

    def test_unfrozen_embedder_moves(self):
        source = micro_source()
        x, y = linear_toy_data(n=120, seed=23)
        plan = TransferPlan(source, freeze_embedder=False)
        tuned = finetune_target(plan, x, y, MICRO, seed=1)
        moved = any(not np.array_equal(pa, pb) for pa, pb in
                    zip(source.embedder.parameters(), tuned.embedder.parameters()))
        assert moved

    def test_zero_epochs_reproduces_source_outputs(self):
        source = micro_source()
        x, y = linear_toy_data(n=120, seed=24)
        plan = TransferPlan(source, target_epochs=0)
        tuned = finetune_target(plan, x, y, seed=2)
        seed = np.random.SeedSequence(99)
        a = source.sample(np.array([0.4]), m=6, stride=10, rng=np.random.default_rng(seed))
        b = tuned.sample(np.array([0.4]), m=6, stride=10, rng=np.random.default_rng(seed))
        assert np.array_equal(a.samples, b.samples)

    def test_empty_target_rejected(self):
        source = micro_source()
        with pytest.raises(ValueError, match="empty"):
            finetune_target(TransferPlan(source), np.empty((0, 1)), np.empty(0), seed=0)

    def test_dimension_mismatch_rejected(self):
        source = micro_source()
        x = np.random.default_rng(0).standard_normal((40, 3))
        with pytest.raises(TransferIncompatibleError):
            finetune_target(TransferPlan(source), x, np.zeros(40), seed=0)

    def test_fresh_network_differs_from_warm_start(self):
        source = micro_source()
        x, y = linear_toy_data(n=120, seed=25)
        warm = finetune_target(TransferPlan(source), x, y, MICRO, seed=3)
        cold = finetune_target(
            TransferPlan(source, warm_start_score_net=False), x, y, MICRO, seed=3)
        differs = any(not np.array_equal(pa, pb) for pa, pb in
                      zip(warm.score_net.parameters(), cold.score_net.parameters()))
        assert differs

    def test_standardizer_reused_from_source(self):
        source = micro_source()
        x, y = linear_toy_data(n=120, seed=26)
        tuned = finetune_target(TransferPlan(source), x, y, MICRO, seed=4)
        assert tuned.standardizer is source.standardizer

    def test_discrete_finetune_roundtrip(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(300)
        labels = rng.integers(0, 3, size=300)
        source = train_discrete(x, labels, MICRO, seed=6)
        source.meta["role"] = "source"
        x2 = rng.standard_normal(100)
        labels2 = rng.integers(0, 3, size=100)
        tuned = finetune_target(TransferPlan(source), x2, labels2, MICRO, seed=7)
        assert tuned.kind == "discrete"
        for pa, pb in zip(source.embedder.parameters(), tuned.embedder.parameters()):
            assert np.array_equal(pa, pb)
        with pytest.raises(TransferIncompatibleError):
            finetune_target(TransferPlan(source), x2, labels2 + 5, MICRO, seed=8)

    def test_scratch_training_differs(self):
        source = micro_source()
        x, y = linear_toy_data(n=120, seed=27)
        tuned = finetune_target(TransferPlan(source), x, y, MICRO, seed=9)
        scratch = train(x, y, MICRO, seed=9)
        differs = any(not np.array_equal(pa, pb) for pa, pb in
                      zip(tuned.score_net.parameters(), scratch.score_net.parameters()))
        assert differs
