"""
Слияние оценок трёх систем и подбор весов перебором по сетке.

fused = (S1·α + S2·(1−α))·β + S3·(1−β)
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from evaluation.metrics import compute_eer, compute_min_dcf
from evaluation.trials import check_alignment
from schemas.configs import DcfParams, FusionWeights
from schemas.records import FusionSearch, ScoreSet

logger = logging.getLogger(__name__)


def _aligned(s1: ScoreSet, s2: ScoreSet, s3: ScoreSet) -> None:
    reference = [(t.enroll_id, t.test_id) for t in s1.trials]
    for other in (s2, s3):
        check_alignment(reference, [(t.enroll_id, t.test_id) for t in other.trials])


def min_max(scores: np.ndarray) -> np.ndarray:
    """Приведение к [0, 1]; постоянные оценки становятся нулями."""
    low, high = scores.min(), scores.max()
    if high == low:
        return np.zeros_like(scores)
    return (scores - low) / (high - low)


def _combine(a: np.ndarray, b: np.ndarray, c: np.ndarray, alpha: float, beta: float):
    return (a * alpha + b * (1.0 - alpha)) * beta + c * (1.0 - beta)


def fuse_scores(
    s1: ScoreSet,
    s2: ScoreSet,
    s3: ScoreSet,
    weights: FusionWeights = FusionWeights(),
    normalize: bool = False,
    system_name: str = "fusion",
) -> ScoreSet:
    """
    Потрайловое слияние; трайлы должны совпадать по порядку.

    :param normalize: Min-max нормализация каждой системы перед слиянием
    :raises ScoreAlignmentError: Первая позиция расхождения трайлов
    """
    _aligned(s1, s2, s3)
    arrays = [s.score_array() for s in (s1, s2, s3)]
    if normalize:
        arrays = [min_max(a) for a in arrays]
    fused = _combine(*arrays, weights.alpha, weights.beta)
    return ScoreSet(system_name=system_name, trials=list(s1.trials), scores=fused.tolist())


def tune_fusion(
    s1: ScoreSet,
    s2: ScoreSet,
    s3: ScoreSet,
    grid_step: float = 0.01,
    params: DcfParams = DcfParams(),
    normalize: bool = False,
    workers: int = 1,
) -> FusionSearch:
    """
    Полный перебор α, β ∈ {0, step, …, 1}.

    Выбирается минимальный EER, при равенстве - меньший min_dcf,
    затем лексикографически меньшая пара (α, β).

    :raises ValueError: Трайлы без меток или шаг не делит 1
    """
    _aligned(s1, s2, s3)
    if not s1.is_labeled:
        raise ValueError("tune_fusion: нужны размеченные трайлы валидации")
    cells = round(1.0 / grid_step)
    if cells < 1 or abs(cells * grid_step - 1.0) > 1e-9:
        raise ValueError(f"tune_fusion: шаг {grid_step} должен делить 1 нацело")
    grid = [round(i * grid_step, 10) for i in range(cells + 1)]
    arrays = [s.score_array() for s in (s1, s2, s3)]
    if normalize:
        arrays = [min_max(a) for a in arrays]

    def row(alpha: float) -> tuple[list[float], list[float]]:
        eers, dcfs = [], []
        for beta in grid:
            fused = s1.model_copy(update={"scores": _combine(*arrays, alpha, beta).tolist()})
            eers.append(compute_eer(fused)[0])
            dcfs.append(compute_min_dcf(fused, params)[0])
        return eers, dcfs

    logger.info(f"🔍 Подбор весов слияния: сетка {len(grid)}×{len(grid)}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, grid))
    else:
        rows = [row(alpha) for alpha in grid]

    surface_eer = [eers for eers, _ in rows]
    surface_dcf = [dcfs for _, dcfs in rows]
    candidates = (
        (surface_eer[i][j], surface_dcf[i][j], alpha, beta)
        for i, alpha in enumerate(grid)
        for j, beta in enumerate(grid)
    )
    eer, min_dcf, alpha, beta = min(candidates)
    logger.info(f"✅ Лучшие веса: α={alpha}, β={beta}, EER={eer * 100:.2f}%, minDCF={min_dcf:.4f}")
    return FusionSearch(
        weights=FusionWeights(alpha=alpha, beta=beta),
        eer=eer,
        min_dcf=min_dcf,
        grid=grid,
        surface_eer=surface_eer,
        surface_min_dcf=surface_dcf,
    )
