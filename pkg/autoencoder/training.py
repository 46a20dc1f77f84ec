"""
Обучение автоэнкодера восстанавливать соседние i-vector и извлечение ae-vector.

Пара обучения - (w, v): w - вектор якоря, v - один из его k ближайших
соседей по косинусу (сам якорь исключён). Лосс - MSE(decoder(encoder(w)), v).
"""

from __future__ import annotations

import logging

import numpy as np

from autoencoder.model import AEModel
from nncore import Optimizer, Tensor
from nncore import functional as F
from schemas.configs import AETrainConfig
from schemas.records import TrainHistory
from utils.exceptions import NonFiniteError, ShapeError
from vectorspace import VectorSet, top_k_neighbors

logger = logging.getLogger(__name__)


def build_training_pairs(vectors: VectorSet, k: int) -> list[tuple[str, str]]:
    """
    Для каждого якоря w ровно k пар (w, v_i) с его top-k соседями.

    :raises PoolTooSmallError: Если векторов меньше k + 1
    """
    pairs: list[tuple[str, str]] = []
    for anchor in vectors.ids:
        neighbors = top_k_neighbors(anchor, vectors.get(anchor), vectors, k)
        pairs.extend((anchor, neighbor) for neighbor, _ in neighbors)
    logger.info(f"🔍 Пар для автоэнкодера: {len(pairs)} (k={k}, якорей {len(vectors)})")
    return pairs


def _pair_arrays(vectors: VectorSet, pairs: list[tuple[str, str]]):
    inputs = np.stack([vectors.get(w) for w, _ in pairs])
    targets = np.stack([vectors.get(v) for _, v in pairs])
    return inputs, targets


def train_ae(
    vectors: VectorSet, pairs: list[tuple[str, str]], config: AETrainConfig
) -> tuple[AEModel, TrainHistory]:
    """
    Обучает автоэнкодер мини-батчами с перемешиванием пар каждую эпоху.

    :param vectors: Векторы, на которые ссылаются пары
    :param pairs: Пары (вход, цель) из build_training_pairs
    :param config: Настройки обучения
    :return: Модель и история среднего MSE по эпохам
    :raises NonFiniteError: Лосс стал NaN/Inf (с номером эпохи и батча)
    """
    if not pairs:
        raise ValueError("train_ae: нет обучающих пар")
    if vectors.dim != config.dims[0]:
        raise ShapeError(f"train_ae: векторы {vectors.dim}-d, модель ждёт {config.dims[0]}")
    if config.length_normalize:
        vectors = vectors.length_normalized()

    init_seed, shuffle_seed = np.random.SeedSequence(config.seed).spawn(2)
    model = AEModel(config.dims, np.random.default_rng(init_seed))
    shuffle_rng = np.random.default_rng(shuffle_seed)
    optimizer = Optimizer(list(model.named_parameters()), config.optimizer)
    inputs, targets = _pair_arrays(vectors, pairs)
    batch_size = config.optimizer.batch_size
    history = TrainHistory()

    logger.info(
        f"🧠 Обучение автоэнкодера {config.dims}: {len(pairs)} пар, "
        f"{config.epochs} эпох, {config.optimizer.kind} lr={config.optimizer.learning_rate}"
    )
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(pairs))
        loss_sum = 0.0
        lr = optimizer.config.learning_rate
        for batch, start in enumerate(range(0, len(order), batch_size)):
            rows = order[start : start + batch_size]
            loss = F.mse_loss(model(Tensor(inputs[rows])), targets[rows])
            value = loss.item()
            if not np.isfinite(value):
                logger.error(f"❌ Нечисловой лосс: эпоха {epoch}, батч {batch}")
                raise NonFiniteError("MSE стал NaN/Inf", {"epoch": epoch, "batch": batch})
            loss.backward()
            lr = optimizer.step()
            loss_sum += value * len(rows)
        epoch_loss = loss_sum / len(pairs)
        history.epoch_losses.append(epoch_loss)
        history.learning_rates.append(lr)
        logger.info(f"Эпоха {epoch + 1}/{config.epochs}: MSE={epoch_loss:.6f}, lr={lr:.6g}")

    return model, history


def extract_ae_vectors(
    model: AEModel, vectors: VectorSet, length_normalize: bool = False
) -> VectorSet:
    """
    ae-vector = decoder(encoder(w)) для каждого тестового вектора.

    Порядок и идентификаторы сохраняются.
    """
    if vectors.dim != model.input_dim:
        raise ShapeError(
            f"extract_ae_vectors: векторы {vectors.dim}-d, модель ждёт {model.input_dim}"
        )
    if len(vectors) == 0:
        return VectorSet([], np.zeros((0, model.dims[-1])))
    if length_normalize:
        vectors = vectors.length_normalized()
    outputs = model(Tensor(vectors.matrix)).data
    logger.info(f"✅ Извлечено {len(vectors)} ae-vector")
    return VectorSet(vectors.ids, outputs)
