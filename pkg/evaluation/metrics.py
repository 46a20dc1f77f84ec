"""
EER и минимальная DCF.

Решение "принять" при score ≥ θ: P_miss(θ) - доля target с score < θ,
P_fa(θ) - доля nontarget с score ≥ θ.
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from schemas.configs import DcfParams
from schemas.records import MetricsReport, ScoreSet
from utils.exceptions import SingleClassError

logger = logging.getLogger(__name__)


def _split_classes(scoreset: ScoreSet) -> tuple[np.ndarray, np.ndarray]:
    if not scoreset.is_labeled:
        raise ValueError(f"{scoreset.system_name}: у трайлов нет меток")
    scores = scoreset.score_array()
    mask = scoreset.target_mask()
    targets, nontargets = np.sort(scores[mask]), np.sort(scores[~mask])
    if len(targets) == 0 or len(nontargets) == 0:
        logger.error(f"❌ {scoreset.system_name}: в наборе только один класс")
        raise SingleClassError(
            f"{scoreset.system_name}: нужно ≥ 1 target и ≥ 1 nontarget "
            f"(есть {len(targets)} и {len(nontargets)})"
        )
    return targets, nontargets


def _error_rates(targets: np.ndarray, nontargets: np.ndarray, thresholds: np.ndarray):
    p_miss = np.searchsorted(targets, thresholds, side="left") / len(targets)
    p_fa = (len(nontargets) - np.searchsorted(nontargets, thresholds, side="left")) / len(
        nontargets
    )
    return p_miss, p_fa


def compute_eer(scoreset: ScoreSet) -> tuple[float, float]:
    """
    Равновероятная ошибка: точка, где P_miss = P_fa.

    Пороги - все различные оценки и +inf. Если кривые пересекаются между
    соседними порогами, EER и порог интерполируются линейно по отрезку ROC.

    :return: (eer в долях, порог)
    :raises SingleClassError: Нет target или nontarget
    """
    targets, nontargets = _split_classes(scoreset)
    thresholds = np.append(np.unique(np.concatenate([targets, nontargets])), np.inf)
    p_miss, p_fa = _error_rates(targets, nontargets, thresholds)
    gap = p_miss - p_fa
    # gap не убывает: от −1 на минимальной оценке до +1 на +inf
    i = int(np.argmax(gap >= 0))
    if gap[i] == 0:
        return float(p_miss[i]), float(thresholds[i])
    lo = i - 1
    t = gap[lo] / (gap[lo] - gap[i])
    eer = p_miss[lo] + t * (p_miss[i] - p_miss[lo])
    if math.isinf(thresholds[i]):
        threshold = thresholds[lo]
    else:
        threshold = thresholds[lo] + t * (thresholds[i] - thresholds[lo])
    return float(eer), float(threshold)


def _normalizer(params: DcfParams) -> float:
    return min(params.c_miss * params.p_target, params.c_fa * (1.0 - params.p_target))


def _dcf(p_miss, p_fa, params: DcfParams):
    cost = params.c_miss * params.p_target * p_miss + params.c_fa * (1.0 - params.p_target) * p_fa
    return cost / _normalizer(params)


def compute_min_dcf(
    scoreset: ScoreSet, params: DcfParams = DcfParams()
) -> tuple[float, float | None]:
    """
    Минимум нормированной DCF по порогам −inf, серединам между соседними
    различными оценками и +inf.

    :return: (min_dcf, порог); порог None, если минимум на ±inf
    """
    targets, nontargets = _split_classes(scoreset)
    distinct = np.unique(np.concatenate([targets, nontargets]))
    thresholds = np.concatenate([[-np.inf], (distinct[:-1] + distinct[1:]) / 2.0, [np.inf]])
    p_miss, p_fa = _error_rates(targets, nontargets, thresholds)
    costs = _dcf(p_miss, p_fa, params)
    best = int(np.argmin(costs))
    threshold = float(thresholds[best])
    return float(costs[best]), (None if math.isinf(threshold) else threshold)


def compute_dcf(scoreset: ScoreSet, threshold: float, params: DcfParams = DcfParams()) -> float:
    """Нормированная DCF при фиксированном пороге."""
    targets, nontargets = _split_classes(scoreset)
    p_miss, p_fa = _error_rates(targets, nontargets, np.array([threshold]))
    return float(_dcf(p_miss, p_fa, params)[0])


def evaluate(scoreset: ScoreSet, params: DcfParams = DcfParams()) -> MetricsReport:
    eer, eer_threshold = compute_eer(scoreset)
    min_dcf, dcf_threshold = compute_min_dcf(scoreset, params)
    logger.info(
        f"✅ {scoreset.system_name}: EER={eer * 100:.2f}%, minDCF={min_dcf:.4f} "
        f"({len(scoreset.scores)} трайлов)"
    )
    return MetricsReport(
        system=scoreset.system_name,
        trials=len(scoreset.scores),
        eer=eer,
        eer_threshold=eer_threshold,
        min_dcf=min_dcf,
        dcf_threshold=dcf_threshold,
        params=params,
    )


def evaluate_many(
    scoresets: Sequence[ScoreSet], params: DcfParams = DcfParams()
) -> list[MetricsReport]:
    """Одна строка метрик на каждый набор оценок."""
    return [evaluate(scoreset, params) for scoreset in scoresets]
