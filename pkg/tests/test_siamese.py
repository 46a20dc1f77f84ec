"""
Тесты VGG-энкодера, двух- и трёхветочной сетей, обучения и инференса.
"""

import math

import numpy as np
import pytest

from features import FeatureStore
from nncore import Tensor
from nncore import functional as F
from schemas.configs import EncoderProfile, OptimizerConfig, SiameseTrainConfig
from schemas.records import Trial, TrialLabel
from siamese import (
    DoubleBranchModel,
    Encoder,
    TripleBranchModel,
    build_double,
    build_triple,
    double_forward,
    encoder_forward,
    extract_embeddings,
    load_siamese,
    save_siamese,
    score_double,
    train_double,
    train_triple,
)
from utils.exceptions import CheckpointFormatError, MissingInputError, ShapeError

IDS = [f"spk{s}-utt{u}" for s in range(3) for u in range(3)]


@pytest.fixture
def store(tmp_path, rng):
    """Признаки 8×40 (одно высказывание 8×5) для профиля tiny."""
    store = FeatureStore(tmp_path / "features")
    for utt in IDS:
        store.put(utt, rng.standard_normal((8, 40)))
    store.put("short", rng.standard_normal((8, 5)))
    return store


def train_config(**overrides) -> SiameseTrainConfig:
    values = {
        "profile": "tiny",
        "epochs": 2,
        "crop_frames": 16,
        "optimizer": OptimizerConfig(kind="adam", learning_rate=0.001, batch_size=4),
    }
    values.update(overrides)
    return SiameseTrainConfig(**values)


PAIRS = [
    ("spk0-utt0", "spk0-utt1", 1),
    ("spk0-utt0", "spk1-utt0", 0),
    ("spk1-utt0", "spk1-utt2", 1),
    ("spk1-utt0", "spk2-utt1", 0),
    ("spk2-utt0", "spk2-utt2", 1),
    ("spk2-utt0", "spk0-utt2", 0),
]
TRIPLETS = [
    ("spk0-utt0", "spk0-utt1", "spk1-utt0"),
    ("spk1-utt0", "spk1-utt2", "spk2-utt1"),
    ("spk2-utt0", "spk2-utt2", "spk0-utt2"),
]


# =============================================================================
# Энкодер
# =============================================================================


class TestEncoder:
    def test_tiny_trace_time_lengths(self, tiny_profile, rng):
        trace = []
        out = encoder_forward(Encoder(tiny_profile, rng), rng.standard_normal((8, 350)), trace)
        assert out.shape == (25,)
        assert [shape[-1] for shape in trace[:9]] == [350, 350, 175, 175, 175, 87, 87, 87, 43]
        assert trace[8] == (32, 1, 43)
        assert trace[9:] == [(32,), (64,), (25,)]

    @pytest.mark.slow
    def test_full_profile_shape_chain(self, rng):
        trace = []
        encoder = Encoder(EncoderProfile.preset("full"), rng)
        out = encoder_forward(encoder, rng.standard_normal((80, 350)), trace)
        assert out.shape == (400,)
        assert trace == [
            (128, 80, 350), (128, 80, 350), (128, 40, 175),
            (256, 40, 175), (256, 40, 175), (256, 20, 87),
            (512, 20, 87), (512, 20, 87), (512, 10, 43),
            (5120,), (1024,), (400,),
        ]

    def test_zero_input_gives_zero_embedding(self, tiny_profile, rng):
        out = encoder_forward(Encoder(tiny_profile, rng), np.zeros((8, 16)))
        np.testing.assert_array_equal(out, np.zeros(25))

    def test_length_independent_output(self, tiny_profile, rng):
        encoder = Encoder(tiny_profile, rng)
        short = encoder_forward(encoder, rng.standard_normal((8, 16)))
        long = encoder_forward(encoder, rng.standard_normal((8, 32)))
        assert short.shape == long.shape == (25,)

    def test_batch_matches_single(self, tiny_profile, rng):
        encoder = Encoder(tiny_profile, rng)
        batch = rng.standard_normal((2, 8, 16))
        stacked = encoder(Tensor(batch)).data
        np.testing.assert_allclose(stacked[1], encoder_forward(encoder, batch[1]), atol=1e-12)

    def test_too_few_frames(self, tiny_profile, rng):
        with pytest.raises(ShapeError):
            encoder_forward(Encoder(tiny_profile, rng), np.zeros((8, 7)))

    def test_wrong_bins(self, tiny_profile, rng):
        with pytest.raises(ShapeError):
            encoder_forward(Encoder(tiny_profile, rng), np.zeros((10, 16)))


# =============================================================================
# Двухветочная сеть
# =============================================================================


class TestDoubleBranch:
    def test_zero_head_scores_half(self, tiny_profile, rng):
        model = DoubleBranchModel(tiny_profile, rng)
        a, b = rng.standard_normal((2, 8, 16))
        assert double_forward(model, a, b) == 0.5

    def test_random_head_in_open_interval(self, tiny_profile, rng):
        model = DoubleBranchModel(tiny_profile, rng, zero_init_head=False)
        for _ in range(3):
            a, b = rng.standard_normal((2, 8, 16))
            assert 0.0 < double_forward(model, a, b) < 1.0

    def test_branches_share_encoder(self, tiny_profile, rng):
        model = DoubleBranchModel(tiny_profile, rng)
        names = [name for name, _ in model.named_parameters()]
        assert len(names) == len(set(names))
        assert sum(name.startswith("encoder.conv1_1.") for name in names) == 2
        assert len(model.head) == 5
        assert model.head[0].weight.shape == (64, 50)

    def test_initial_bce_is_ln2(self, tiny_profile, rng):
        model = DoubleBranchModel(tiny_profile, rng)
        a, b = (Tensor(rng.standard_normal((4, 8, 16))) for _ in range(2))
        probs = model(a, b)
        assert math.isclose(F.bce_loss(probs, [1, 0, 1, 0]).item(), math.log(2.0))

    def test_training_records_and_is_deterministic(self, store):
        config = train_config()
        first = train_double(build_double(config), PAIRS, store, config)[1]
        second = train_double(build_double(config), PAIRS, store, config)[1]
        assert len(first.epoch_losses) == 2
        assert first.epoch_losses == second.epoch_losses
        assert math.isclose(first.epoch_losses[0], math.log(2.0), rel_tol=0.05)

    def test_zero_learning_rate_keeps_loss(self, store):
        frozen = OptimizerConfig(kind="adam", learning_rate=0.0, batch_size=3)
        config = train_config(optimizer=frozen)
        _, history = train_double(build_double(config), PAIRS, store, config)
        assert history.epoch_losses[0] == history.epoch_losses[1]

    def test_needs_pairs(self, store):
        config = train_config()
        with pytest.raises(ValueError):
            train_double(build_double(config), [], store, config)

    def test_score_double_over_trials(self, store):
        model = build_double(train_config())
        trials = [
            Trial(enroll_id="spk0-utt0", test_id="spk0-utt1", label=TrialLabel.TARGET),
            Trial(enroll_id="spk0-utt0", test_id="short", label=TrialLabel.NONTARGET),
        ]
        scoreset = score_double(model, trials, store)
        assert scoreset.system_name == "system2"
        assert scoreset.scores == [0.5, 0.5]


# =============================================================================
# Трёхветочная сеть
# =============================================================================


class TestTripleBranch:
    def test_client_equal_impostor_gives_margin(self, tiny_profile, rng):
        model = TripleBranchModel(tiny_profile, rng, margin=0.2)
        a, c = Tensor(rng.standard_normal((8, 16))), Tensor(rng.standard_normal((8, 16)))
        assert math.isclose(model(a, c, c).item(), 0.2)

    def test_hinge_nonnegative_without_margin(self, tiny_profile, rng):
        model = TripleBranchModel(tiny_profile, rng, margin=0.0)
        losses = model(*(Tensor(rng.standard_normal((5, 8, 16))) for _ in range(3)))
        assert np.all(losses.data >= 0.0)

    def test_training_keeps_unit_embeddings(self, store):
        config = train_config(epochs=3)
        model, history = train_triple(build_triple(config), TRIPLETS, store, config)
        assert len(history.active_fractions) == 3
        assert all(0.0 <= f <= 1.0 for f in history.active_fractions)
        embeddings = extract_embeddings(model, IDS, store)
        np.testing.assert_allclose(np.linalg.norm(embeddings.matrix, axis=1), 1.0, atol=1e-9)

    def test_needs_triplets(self, store):
        config = train_config()
        with pytest.raises(ValueError):
            train_triple(build_triple(config), [], store, config)


# =============================================================================
# Инференс и сохранение
# =============================================================================


class TestInference:
    def test_embeddings_are_unit_and_repeatable(self, store, tiny_profile, rng):
        model = TripleBranchModel(tiny_profile, rng)
        first = extract_embeddings(model, [*IDS, "short"], store)
        second = extract_embeddings(model, [*IDS, "short"], store, workers=2)
        assert first.ids == [*IDS, "short"]
        np.testing.assert_allclose(np.linalg.norm(first.matrix, axis=1), 1.0, atol=1e-9)
        np.testing.assert_array_equal(first.matrix, second.matrix)

    def test_missing_features(self, store, tiny_profile, rng):
        with pytest.raises(MissingInputError):
            extract_embeddings(TripleBranchModel(tiny_profile, rng), ["ghost"], store)

    def test_save_and_load(self, tmp_path, tiny_profile, rng):
        model = TripleBranchModel(tiny_profile, rng, margin=0.3)
        path = save_siamese(model, tmp_path / "triple.ssvm", {"epochs": 1})
        restored = load_siamese(path)
        assert isinstance(restored, TripleBranchModel)
        assert restored.margin == 0.3
        x = rng.standard_normal((8, 16))
        np.testing.assert_array_equal(encoder_forward(restored, x), encoder_forward(model, x))

    def test_load_rejects_other_checkpoints(self, tmp_path, rng):
        from autoencoder import AEModel, save_ae

        path = save_ae(AEModel([4, 2, 4], rng), tmp_path / "ae.ssvm")
        with pytest.raises(CheckpointFormatError):
            load_siamese(path)
