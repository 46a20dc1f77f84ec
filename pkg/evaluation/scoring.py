"""
Косинусные оценки трайлов по коллекции векторов.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from schemas.records import ScoreSet, Trial
from utils.exceptions import DegenerateInputError, TrialResolutionError
from vectorspace.collection import VectorSet

logger = logging.getLogger(__name__)


def _rows(vectors: VectorSet, trials: Sequence[Trial], role: str) -> list[int]:
    rows = []
    for line, trial in enumerate(trials, start=1):
        utt = getattr(trial, role)
        if utt not in vectors:
            logger.error(f"❌ Трайл {line}: id {utt} отсутствует среди векторов")
            raise TrialResolutionError(line, utt)
        rows.append(vectors.index[utt])
    return rows


def score_trials(vectors: VectorSet, trials: Sequence[Trial], system_name: str) -> ScoreSet:
    """
    score = cos(enroll, test) для каждого трайла, порядок сохраняется.

    :raises TrialResolutionError: id трайла не найден (с номером строки)
    """
    enroll = vectors.matrix[_rows(vectors, trials, "enroll_id")].reshape(len(trials), -1)
    test = vectors.matrix[_rows(vectors, trials, "test_id")].reshape(len(trials), -1)
    norms = np.linalg.norm(enroll, axis=1) * np.linalg.norm(test, axis=1)
    if np.any(norms < 1e-24):
        raise DegenerateInputError("score_trials: нулевой вектор в трайле")
    scores = np.clip((enroll * test).sum(axis=1) / norms, -1.0, 1.0)
    logger.info(f"✅ {system_name}: оценено {len(trials)} трайлов")
    return ScoreSet(system_name=system_name, trials=list(trials), scores=scores.tolist())
