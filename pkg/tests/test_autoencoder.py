"""
Тесты автоэнкодера соседей: пары, обучение, извлечение ae-vector.
"""

import numpy as np
import pytest

from autoencoder import (
    AEModel,
    build_training_pairs,
    extract_ae_vectors,
    load_ae,
    save_ae,
    train_ae,
)
from evaluation import build_trials, compute_eer, score_trials
from features import synth_vectors
from nncore import Tensor
from schemas.configs import AETrainConfig, OptimizerConfig
from utils.exceptions import NonFiniteError, PoolTooSmallError, ShapeError
from vectorspace import VectorSet, cosine_score


def small_config(**overrides) -> AETrainConfig:
    values = {
        "dims": [20, 12, 6, 12, 20],
        "epochs": 50,
        "optimizer": OptimizerConfig(kind="adam", learning_rate=0.01, batch_size=10),
        "neighbor_k": 2,
    }
    values.update(overrides)
    return AETrainConfig(**values)


@pytest.fixture
def clustered():
    """10 кластеров по 5 векторов, шум 0.1, размерность 20."""
    return synth_vectors(10, 5, seed=7, dim=20, noise=0.1)


class TestTrainingPairs:
    def test_single_neighbor_oracle(self):
        vectors = VectorSet(["a", "b", "c"], [[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]])
        pairs = build_training_pairs(vectors, k=1)
        assert len(pairs) == 3
        for anchor, target in pairs:
            others = [u for u in vectors.ids if u != anchor]
            best = max(others, key=lambda u: cosine_score(vectors.get(anchor), vectors.get(u)))
            assert target == best

    def test_count_is_k_per_anchor_without_identity(self, clustered):
        vectors, _ = clustered
        pairs = build_training_pairs(vectors, k=4)
        assert len(pairs) == 4 * len(vectors)
        assert all(w != v for w, v in pairs)

    def test_identical_vectors_pair_each_other(self):
        vectors = VectorSet(["a", "b", "c"], [[1.0, 2.0], [1.0, 2.0], [-2.0, 1.0]])
        pairs = dict(build_training_pairs(vectors, k=1))
        assert pairs["a"] == "b" and pairs["b"] == "a"

    def test_pool_too_small(self):
        vectors = VectorSet(["a", "b"], [[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PoolTooSmallError):
            build_training_pairs(vectors, k=2)


class TestTraining:
    def test_loss_halves_on_clusters(self, clustered):
        vectors, _ = clustered
        config = small_config()
        _, history = train_ae(vectors, build_training_pairs(vectors, 2), config)
        assert len(history.epoch_losses) == config.epochs
        assert history.epoch_losses[-1] < 0.5 * history.epoch_losses[0]

    def test_deterministic_history(self, clustered):
        vectors, _ = clustered
        pairs = build_training_pairs(vectors, 2)
        config = small_config(epochs=5)
        first = train_ae(vectors, pairs, config)[1]
        second = train_ae(vectors, pairs, config)[1]
        assert first.epoch_losses == second.epoch_losses

    def test_zero_learning_rate_keeps_loss(self, clustered):
        vectors, _ = clustered
        config = small_config(
            epochs=3, optimizer=OptimizerConfig(kind="sgd", learning_rate=0.0, batch_size=1)
        )
        pair = [(vectors.ids[0], vectors.ids[1])]
        _, history = train_ae(vectors, pair, config)
        assert history.epoch_losses[0] == history.epoch_losses[1] == history.epoch_losses[2]

    def test_sgd_decay_recorded(self, clustered):
        vectors, _ = clustered
        config = small_config(
            epochs=2,
            optimizer=OptimizerConfig(
                kind="sgd", learning_rate=0.01, lr_decay=0.0002, batch_size=100
            ),
        )
        _, history = train_ae(vectors, build_training_pairs(vectors, 2), config)
        # 100 пар, батч 100: один шаг на эпоху, lr второй эпохи - после 1 шага
        assert history.learning_rates == pytest.approx([0.01, 0.01 / 1.0002])

    def test_nonfinite_loss_aborts(self):
        vectors = VectorSet(["a", "b"], np.full((2, 20), 1e200))
        with pytest.raises(NonFiniteError) as info:
            train_ae(vectors, [("a", "b")], small_config(epochs=1))
        assert info.value.diagnostics == {"epoch": 0, "batch": 0}

    def test_dimension_mismatch(self, clustered):
        vectors, _ = clustered
        with pytest.raises(ShapeError):
            train_ae(vectors, [("x", "y")], small_config(dims=[8, 4, 8]))

    def test_empty_pairs(self, clustered):
        with pytest.raises(ValueError):
            train_ae(clustered[0], [], small_config())

    @pytest.mark.slow
    def test_identity_targets_are_learned(self, rng):
        vectors = VectorSet([f"u{i}" for i in range(40)], rng.standard_normal((40, 4)))
        config = AETrainConfig(
            dims=[4, 16, 4],
            epochs=400,
            optimizer=OptimizerConfig(kind="adam", learning_rate=0.01, batch_size=40),
        )
        _, history = train_ae(vectors, [(u, u) for u in vectors.ids], config)
        assert history.epoch_losses[-1] < 0.01 * history.epoch_losses[0]


class TestExtraction:
    def test_zero_weights_give_output_bias(self, rng):
        model = AEModel([6, 4, 6], rng)
        for layer in model.layers:
            layer.weight.data = np.zeros_like(layer.weight.data)
        model.layers[-1].bias.data = np.arange(6.0)
        vectors = VectorSet(["a", "b"], rng.standard_normal((2, 6)))
        out = extract_ae_vectors(model, vectors)
        np.testing.assert_array_equal(out.matrix, np.tile(np.arange(6.0), (2, 1)))

    def test_order_and_dimension_preserved(self, rng):
        model = AEModel([400, 300, 200, 300, 400], rng)
        ids = [f"u{i:03d}" for i in range(100)]
        vectors = VectorSet(ids, rng.standard_normal((100, 400)))
        out = extract_ae_vectors(model, vectors)
        assert out.ids == ids
        assert out.dim == 400
        assert np.all(np.isfinite(out.matrix))

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ShapeError):
            extract_ae_vectors(AEModel([6, 4, 6], rng), VectorSet(["a"], np.ones((1, 5))))

    def test_save_and_load_keep_outputs(self, tmp_path, rng):
        model = AEModel([6, 4, 6], rng)
        path = save_ae(model, tmp_path / "ae.ssvm", {"epochs": 1})
        restored = load_ae(path)
        x = Tensor(rng.standard_normal((3, 6)))
        np.testing.assert_array_equal(restored(x).data, model(x).data)
        assert (tmp_path / "ae.ssvm.arch.json").exists()


@pytest.mark.slow
class TestDenoising:
    def test_ae_vectors_do_not_hurt_eer(self):
        vectors, speaker_of = synth_vectors(20, 10, seed=3, noise=2.0)
        config = AETrainConfig(
            epochs=50,
            neighbor_k=4,
            optimizer=OptimizerConfig.adam_defaults(learning_rate=1e-3, batch_size=100),
        )
        model, _ = train_ae(vectors, build_training_pairs(vectors, 4), config)
        trials = build_trials(vectors.ids, speaker_of, num_trials=400, seed=0)
        raw_eer, _ = compute_eer(score_trials(vectors, trials, "ivector"))
        ae_eer, _ = compute_eer(score_trials(extract_ae_vectors(model, vectors), trials, "system1"))
        assert ae_eer <= raw_eer
