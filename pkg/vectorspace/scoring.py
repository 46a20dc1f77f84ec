"""
Косинусное сравнение векторов и ранжирование кандидатов.
"""

from __future__ import annotations

import numpy as np

from utils.exceptions import DegenerateInputError, PoolTooSmallError, ShapeError
from vectorspace.collection import VectorSet

_ZERO_NORM = 1e-12


def cosine_score(x, y) -> float:
    """
    Косинусное сходство x·y / (‖x‖‖y‖), симметрично, в [−1, 1].

    :raises ShapeError: Разные размерности
    :raises DegenerateInputError: Нулевой вектор
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError(f"cosine_score: размерности {x.shape} и {y.shape}")
    norm_x, norm_y = np.linalg.norm(x), np.linalg.norm(y)
    if norm_x < _ZERO_NORM or norm_y < _ZERO_NORM:
        raise DegenerateInputError("cosine_score: нулевой вектор")
    return float(np.clip(np.dot(x, y) / (norm_x * norm_y), -1.0, 1.0))


def cosine_rows(queries: np.ndarray, pool: np.ndarray) -> np.ndarray:
    """Матрица косинусов queries × pool (len(queries) × len(pool))."""
    queries = np.atleast_2d(queries)
    if pool.shape[0] == 0:
        return np.zeros((queries.shape[0], 0))
    if queries.shape[1] != pool.shape[1]:
        raise ShapeError(
            f"cosine_rows: размерность {queries.shape[1]} != {pool.shape[1]}"
        )
    q_norms = np.linalg.norm(queries, axis=1)
    p_norms = np.linalg.norm(pool, axis=1)
    if np.any(q_norms < _ZERO_NORM) or np.any(p_norms < _ZERO_NORM):
        raise DegenerateInputError("cosine_rows: нулевой вектор в наборе")
    scores = (queries @ pool.T) / np.outer(q_norms, p_norms)
    return np.clip(scores, -1.0, 1.0)


def rank_candidates(
    ids: np.ndarray, scores: np.ndarray, k: int | None = None
) -> list[tuple[str, float]]:
    """
    Сортировка по убыванию оценки, при равенстве - по возрастанию id.

    :param ids: Массив строковых идентификаторов кандидатов
    :param scores: Оценки кандидатов
    :param k: Сколько вернуть (None - всех)
    """
    if len(ids) == 0:
        return []
    # коды строк в лексикографическом порядке
    _, id_codes = np.unique(ids, return_inverse=True)
    order = np.lexsort((id_codes.ravel(), -scores))
    if k is not None:
        order = order[:k]
    return [(str(ids[i]), float(scores[i])) for i in order]


def top_k_neighbors(
    anchor_id: str,
    anchor_vector,
    pool: VectorSet,
    k: int,
    exclude_self: bool = True,
) -> list[tuple[str, float]]:
    """
    Ровно k ближайших по косинусу кандидатов из пула.

    :param anchor_id: Идентификатор якоря (исключается при exclude_self)
    :param anchor_vector: Вектор якоря
    :param pool: Пул кандидатов
    :param k: Число соседей
    :raises PoolTooSmallError: После исключения в пуле меньше k векторов
    """
    if k < 1:
        raise ValueError(f"top_k_neighbors: k={k} должно быть ≥ 1")
    ids = np.array(pool.ids, dtype=str)
    scores = cosine_rows(np.asarray(anchor_vector, dtype=np.float64), pool.matrix)[0]
    if exclude_self:
        keep = ids != anchor_id
        ids, scores = ids[keep], scores[keep]
    if len(ids) < k:
        raise PoolTooSmallError(k, len(ids))
    return rank_candidates(ids, scores, k)
