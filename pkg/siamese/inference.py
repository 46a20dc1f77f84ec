"""
Инференс по полным высказываниям: эмбеддинги System-3 и оценки System-2.

Случайных окон нет: высказывание целиком, короткие дополняются повтором
до минимальной длины энкодера.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from features.cache import FeatureStore
from features.crop import wrap_pad
from nncore import Tensor
from nncore import functional as F
from schemas.records import ScoreSet, Trial
from settings import MIN_ENCODER_FRAMES
from siamese.model import DoubleBranchModel, Encoder, TripleBranchModel
from vectorspace.collection import VectorSet

logger = logging.getLogger(__name__)


def _full_utterance(store: FeatureStore, utterance_id: str) -> Tensor:
    return Tensor(wrap_pad(store.get(utterance_id), MIN_ENCODER_FRAMES))


def _map(fn, items: Sequence, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def extract_embeddings(
    model: TripleBranchModel | Encoder,
    ids: Sequence[str],
    store: FeatureStore,
    workers: int = 1,
) -> VectorSet:
    """
    Единичные эмбеддинги для каждого высказывания из ids.

    :raises MissingInputError: Нет файла признаков
    """
    encoder = model if isinstance(model, Encoder) else model.encoder

    def embed(utt: str) -> np.ndarray:
        return F.l2_normalize(encoder(_full_utterance(store, utt))).data

    rows = _map(embed, list(ids), workers)
    matrix = np.stack(rows) if rows else np.zeros((0, encoder.profile.embedding_dim))
    logger.info(f"✅ Извлечено {len(rows)} эмбеддингов")
    return VectorSet(list(ids), matrix)


def score_double(
    model: DoubleBranchModel,
    trials: Sequence[Trial],
    store: FeatureStore,
    workers: int = 1,
    system_name: str = "system2",
) -> ScoreSet:
    """
    Оценки двухветочной сети по трайлам.

    Эмбеддинг каждого высказывания считается один раз; голова применяется
    к конкатенации (enroll, test).
    """
    unique = sorted({t.enroll_id for t in trials} | {t.test_id for t in trials})
    encoded = _map(lambda u: model.encoder(_full_utterance(store, u)).data, unique, workers)
    embeddings = dict(zip(unique, encoded))
    scores = [
        float(
            model.score_embeddings(
                Tensor(embeddings[t.enroll_id]), Tensor(embeddings[t.test_id])
            ).item()
        )
        for t in trials
    ]
    logger.info(f"✅ System-2: {len(scores)} оценок по {len(unique)} высказываниям")
    return ScoreSet(system_name=system_name, trials=list(trials), scores=scores)
