"""
VGG-энкодер с self-attention pooling и две сиамские сети поверх него.

Энкодер (профиль full, вход 1×80×N):
    conv1-1/1-2 128 → mpool-1 → conv2-1/2-2 256 → mpool-2 →
    conv3-1/3-2 512 → mpool-3 → SAP (512·10 = 5120) → fc-1 1024 → fc-2 400.
ReLU после каждой свёртки и fc-1; fc-2 линейный.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from nncore import Conv2d, Linear, MaxPool2d, Module, SelfAttentionPooling, Tensor
from nncore import functional as F
from nncore import load_checkpoint, save_checkpoint
from schemas.configs import EncoderProfile
from settings import MIN_ENCODER_FRAMES
from utils.exceptions import CheckpointFormatError, ShapeError
from utils.io import write_json

logger = logging.getLogger(__name__)


class Encoder(Module):
    """
    Общий для всех ветвей CNN-энкодер.

    :param profile: Размеры слоёв
    :param rng: Генератор инициализации
    """

    def __init__(self, profile: EncoderProfile, rng: np.random.Generator):
        c1, c2, c3 = profile.channels
        self.profile = profile
        self.conv1_1 = Conv2d(1, c1, rng)
        self.conv1_2 = Conv2d(c1, c1, rng)
        self.conv2_1 = Conv2d(c1, c2, rng)
        self.conv2_2 = Conv2d(c2, c2, rng)
        self.conv3_1 = Conv2d(c2, c3, rng)
        self.conv3_2 = Conv2d(c3, c3, rng)
        self.pool = MaxPool2d(2)
        self.sap = SelfAttentionPooling(profile.sap_dim, profile.attention_dim, rng)
        self.fc1 = Linear(profile.sap_dim, profile.fc_dims[0], rng)
        self.fc2 = Linear(profile.fc_dims[0], profile.fc_dims[1], rng)

    def _check_input(self, features: Tensor) -> None:
        if features.ndim not in (2, 3):
            raise ShapeError(
                f"Encoder: ожидается bins×N или B×bins×N, получено {features.shape}"
            )
        bins, frames = features.shape[-2:]
        if bins != self.profile.n_mels:
            raise ShapeError(f"Encoder: {bins} мел-полос, профиль ждёт {self.profile.n_mels}")
        if frames < MIN_ENCODER_FRAMES:
            raise ShapeError(
                f"Encoder: N={frames} кадров, нужно ≥ {MIN_ENCODER_FRAMES} для трёх пулингов"
            )

    def forward(self, features: Tensor, trace: list | None = None) -> Tensor:
        """
        :param features: bins×N (одно высказывание) или B×bins×N
        :param trace: Если задан, сюда дописываются формы промежуточных выходов
        """
        self._check_input(features)
        lead = features.shape[:-2]
        x = F.reshape(features, (*lead, 1, *features.shape[-2:]))

        def record(t: Tensor) -> Tensor:
            if trace is not None:
                trace.append(t.shape[len(lead):])
            return t

        for first, second in (
            (self.conv1_1, self.conv1_2),
            (self.conv2_1, self.conv2_2),
            (self.conv3_1, self.conv3_2),
        ):
            x = record(F.relu(first(x)))
            x = record(F.relu(second(x)))
            x = record(self.pool(x))

        channels, bins, frames = x.shape[-3:]
        x = F.reshape(x, (*lead, channels * bins, frames))
        x = record(self.sap(x))
        x = record(F.relu(self.fc1(x)))
        return record(self.fc2(x))


class DoubleBranchModel(Module):
    """
    Двухветочная сеть: конкатенация эмбеддингов → 5 FC → sigmoid.

    Обе ветви - один и тот же объект Encoder.
    """

    kind = "double"

    def __init__(
        self,
        profile: EncoderProfile,
        rng: np.random.Generator,
        zero_init_head: bool = True,
    ):
        self.encoder = Encoder(profile, rng)
        dims = [2 * profile.embedding_dim, *profile.head_dims, 1]
        last = len(dims) - 2
        self.head = [
            Linear(d_in, d_out, rng, zero_init=zero_init_head and index == last)
            for index, (d_in, d_out) in enumerate(zip(dims, dims[1:]))
        ]

    @property
    def profile(self) -> EncoderProfile:
        return self.encoder.profile

    def score_embeddings(self, emb_a: Tensor, emb_b: Tensor) -> Tensor:
        h = F.concat([emb_a, emb_b], axis=-1)
        last = len(self.head) - 1
        for index, layer in enumerate(self.head):
            h = layer(h)
            if index < last:
                h = F.relu(h)
        probs = F.sigmoid(h)
        return F.reshape(probs, probs.shape[:-1])

    def forward(self, feat_a: Tensor, feat_b: Tensor) -> Tensor:
        return self.score_embeddings(self.encoder(feat_a), self.encoder(feat_b))


class TripleBranchModel(Module):
    """Трёхветочная сеть: общий энкодер + l2-нормализация каждого выхода."""

    kind = "triple"

    def __init__(self, profile: EncoderProfile, rng: np.random.Generator, margin: float = 0.2):
        self.encoder = Encoder(profile, rng)
        self.margin = margin

    @property
    def profile(self) -> EncoderProfile:
        return self.encoder.profile

    def embed(self, features: Tensor) -> Tensor:
        return F.l2_normalize(self.encoder(features), axis=-1)

    def forward(self, anchor: Tensor, client: Tensor, impostor: Tensor) -> Tensor:
        """Потери по каждому триплету (без усреднения)."""
        return F.triplet_loss(
            self.embed(anchor),
            self.embed(client),
            self.embed(impostor),
            margin=self.margin,
            reduction="none",
        )


def encoder_forward(
    model: Encoder | DoubleBranchModel | TripleBranchModel,
    features: np.ndarray,
    trace: list | None = None,
) -> np.ndarray:
    """Эмбеддинг одного окна bins×N (без нормализации)."""
    encoder = model if isinstance(model, Encoder) else model.encoder
    return encoder(Tensor(np.asarray(features, dtype=np.float64)), trace=trace).numpy()


def double_forward(model: DoubleBranchModel, feat_a: np.ndarray, feat_b: np.ndarray) -> float:
    """Оценка двухветочной сети для пары окон, в (0, 1)."""
    score = model(
        Tensor(np.asarray(feat_a, dtype=np.float64)),
        Tensor(np.asarray(feat_b, dtype=np.float64)),
    )
    return float(score.item())


_KINDS = {"double": DoubleBranchModel, "triple": TripleBranchModel}


def save_siamese(
    model: DoubleBranchModel | TripleBranchModel, path, train_config: dict | None = None
) -> Path:
    """Чекпоинт + sidecar <path>.arch.json с профилем и настройками обучения."""
    meta = {"architecture": model.kind, "profile": model.profile.model_dump(mode="json")}
    if isinstance(model, TripleBranchModel):
        meta["margin"] = model.margin
    path = save_checkpoint(path, model.state_dict(), meta)
    write_json(path.with_name(path.name + ".arch.json"), {**meta, "train": train_config or {}})
    return path


def load_siamese(path) -> DoubleBranchModel | TripleBranchModel:
    state, meta = load_checkpoint(path)
    kind = meta.get("architecture")
    if kind not in _KINDS:
        raise CheckpointFormatError(f"{path}: неизвестная архитектура {kind!r}")
    profile = EncoderProfile(**meta["profile"])
    rng = np.random.default_rng(0)
    if kind == "triple":
        model = TripleBranchModel(profile, rng, margin=meta.get("margin", 0.2))
    else:
        model = DoubleBranchModel(profile, rng)
    model.load_state_dict(state)
    logger.info(f"📦 Загружена модель {kind} ({model.num_parameters()} параметров) из {path}")
    return model
