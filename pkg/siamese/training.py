"""
Обучение двух- и трёхветочной сетей на отобранных парах и триплетах.

Каждую эпоху для каждого примера берётся свежее случайное окно из
N кадров; порядок примеров перемешивается. Все случайные потоки
выводятся из config.seed, поэтому прогон воспроизводим.
"""

from __future__ import annotations

import logging
from typing import Iterator, Sequence

import numpy as np

from features.cache import FeatureStore
from features.crop import random_crop
from nncore import Optimizer, Tensor
from nncore import functional as F
from schemas.configs import CropConfig, EncoderProfile, SiameseTrainConfig
from schemas.records import TrainHistory
from siamese.model import DoubleBranchModel, TripleBranchModel
from utils.exceptions import NonFiniteError

logger = logging.getLogger(__name__)


def _streams(seed: int) -> tuple[np.random.SeedSequence, ...]:
    """Потоки: инициализация, порядок примеров, сдвиги окон."""
    return tuple(np.random.SeedSequence(seed).spawn(3))


def resolve_profile(config: SiameseTrainConfig, n_mels: int | None = None) -> EncoderProfile:
    overrides = {"n_mels": n_mels} if n_mels is not None else {}
    return EncoderProfile.preset(config.profile, **overrides)


def build_double(config: SiameseTrainConfig, n_mels: int | None = None) -> DoubleBranchModel:
    init_seq, _, _ = _streams(config.seed)
    return DoubleBranchModel(
        resolve_profile(config, n_mels),
        np.random.default_rng(init_seq),
        zero_init_head=config.zero_init_head,
    )


def build_triple(config: SiameseTrainConfig, n_mels: int | None = None) -> TripleBranchModel:
    init_seq, _, _ = _streams(config.seed)
    return TripleBranchModel(
        resolve_profile(config, n_mels), np.random.default_rng(init_seq), margin=config.margin
    )


def _epoch_batches(
    count: int, config: SiameseTrainConfig, order_rng: np.random.Generator
) -> Iterator[np.ndarray]:
    order = order_rng.permutation(count)
    if config.max_pairs_per_epoch is not None:
        order = order[: config.max_pairs_per_epoch]
    for start in range(0, len(order), config.batch_size):
        yield order[start : start + config.batch_size]


def _crops(
    store: FeatureStore, ids: Sequence[str], crop: CropConfig, rng: np.random.Generator
) -> Tensor:
    return Tensor(np.stack([random_crop(store.get(utt), crop, rng) for utt in ids]))


def _check_loss(value: float, epoch: int, batch: int, what: str) -> None:
    if not np.isfinite(value):
        logger.error(f"❌ {what} стал NaN/Inf: эпоха {epoch}, батч {batch}")
        raise NonFiniteError(f"{what} стал NaN/Inf", {"epoch": epoch, "batch": batch})


def train_double(
    model: DoubleBranchModel,
    pairs: Sequence[tuple[str, str, int]],
    store: FeatureStore,
    config: SiameseTrainConfig,
) -> tuple[DoubleBranchModel, TrainHistory]:
    """
    Минимизирует BCE двухветочной сети по парам (anchor, other, label).

    :return: Обученная модель (та же, что на входе) и средний BCE по эпохам
    :raises NonFiniteError: Лосс стал NaN/Inf
    """
    if not pairs:
        raise ValueError("train_double: нет обучающих пар")
    _, order_seq, crop_seq = _streams(config.seed)
    order_rng, crop_rng = np.random.default_rng(order_seq), np.random.default_rng(crop_seq)
    crop = CropConfig(window_length=config.crop_frames, seed=config.seed)
    optimizer = Optimizer(list(model.named_parameters()), config.optimizer)
    history = TrainHistory()

    logger.info(
        f"🧠 Двухветочная сеть ({model.profile.name}): {len(pairs)} пар, "
        f"{config.epochs} эпох, N={config.crop_frames}"
    )
    for epoch in range(config.epochs):
        loss_sum, seen = 0.0, 0
        lr = optimizer.config.learning_rate
        for batch, rows in enumerate(_epoch_batches(len(pairs), config, order_rng)):
            chosen = [pairs[i] for i in rows]
            probs = model(
                _crops(store, [a for a, _, _ in chosen], crop, crop_rng),
                _crops(store, [o for _, o, _ in chosen], crop, crop_rng),
            )
            loss = F.bce_loss(probs, [label for _, _, label in chosen])
            value = loss.item()
            _check_loss(value, epoch, batch, "BCE")
            loss.backward()
            lr = optimizer.step()
            loss_sum += value * len(rows)
            seen += len(rows)
        epoch_loss = loss_sum / seen
        history.epoch_losses.append(epoch_loss)
        history.learning_rates.append(lr)
        logger.info(f"Эпоха {epoch + 1}/{config.epochs}: BCE={epoch_loss:.6f}, lr={lr:.6g}")
    return model, history


def train_triple(
    model: TripleBranchModel,
    triplets: Sequence[tuple[str, str, str]],
    store: FeatureStore,
    config: SiameseTrainConfig,
) -> tuple[TripleBranchModel, TrainHistory]:
    """
    Минимизирует triplet loss по триплетам (anchor, client, impostor).

    Помимо среднего лосса по эпохам записывает долю активных
    триплетов (loss > 0).
    """
    if not triplets:
        raise ValueError("train_triple: нет триплетов")
    _, order_seq, crop_seq = _streams(config.seed)
    order_rng, crop_rng = np.random.default_rng(order_seq), np.random.default_rng(crop_seq)
    crop = CropConfig(window_length=config.crop_frames, seed=config.seed)
    optimizer = Optimizer(list(model.named_parameters()), config.optimizer)
    history = TrainHistory(active_fractions=[])

    logger.info(
        f"🧠 Трёхветочная сеть ({model.profile.name}): {len(triplets)} триплетов, "
        f"{config.epochs} эпох, margin={model.margin}"
    )
    for epoch in range(config.epochs):
        loss_sum, active, seen = 0.0, 0, 0
        lr = optimizer.config.learning_rate
        for batch, rows in enumerate(_epoch_batches(len(triplets), config, order_rng)):
            chosen = [triplets[i] for i in rows]
            per_triplet = model(
                *(
                    _crops(store, [t[role] for t in chosen], crop, crop_rng)
                    for role in range(3)
                )
            )
            loss = F.mean(per_triplet)
            value = loss.item()
            _check_loss(value, epoch, batch, "Triplet loss")
            loss.backward()
            lr = optimizer.step()
            loss_sum += value * len(rows)
            active += int(np.count_nonzero(per_triplet.data > 0))
            seen += len(rows)
        epoch_loss = loss_sum / seen
        history.epoch_losses.append(epoch_loss)
        history.learning_rates.append(lr)
        history.active_fractions.append(active / seen)
        logger.info(
            f"Эпоха {epoch + 1}/{config.epochs}: triplet={epoch_loss:.6f}, "
            f"активных {active / seen:.3f}, lr={lr:.6g}"
        )
    return model, history
