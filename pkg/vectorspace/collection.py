"""
Коллекция векторов дикторов: идентификаторы + матрица n×d.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from schemas.records import SpeakerVector
from utils.exceptions import DegenerateInputError, ShapeError


class VectorSet:
    """
    Неизменяемый набор векторов одной размерности.

    :param ids: Идентификаторы высказываний (уникальные)
    :param matrix: Значения n×d
    """

    def __init__(self, ids: Sequence[str], matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim == 1 and len(ids) == 0:
            matrix = matrix.reshape(0, 0)
        if matrix.ndim != 2 or matrix.shape[0] != len(ids):
            raise ShapeError(
                f"VectorSet: {len(ids)} идентификаторов, матрица {matrix.shape}"
            )
        if not np.all(np.isfinite(matrix)):
            raise ValueError("VectorSet: значения должны быть конечными")
        self.ids: list[str] = list(ids)
        self.index = {utt: row for row, utt in enumerate(self.ids)}
        if len(self.index) != len(self.ids):
            raise ValueError("VectorSet: идентификаторы повторяются")
        self.matrix = matrix
        self.matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, utterance_id: str) -> bool:
        return utterance_id in self.index

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def get(self, utterance_id: str) -> np.ndarray:
        return self.matrix[self.index[utterance_id]]

    def subset(self, ids: Iterable[str]) -> "VectorSet":
        ids = list(ids)
        rows = [self.index[utt] for utt in ids]
        return VectorSet(ids, self.matrix[rows].reshape(len(rows), self.dim))

    def length_normalized(self) -> "VectorSet":
        norms = np.linalg.norm(self.matrix, axis=1, keepdims=True)
        if np.any(norms < 1e-12):
            raise DegenerateInputError("length_normalized: в наборе есть нулевой вектор")
        return VectorSet(self.ids, self.matrix / norms)

    @classmethod
    def from_records(cls, records: Iterable[SpeakerVector]) -> "VectorSet":
        records = list(records)
        if not records:
            return cls([], np.zeros((0, 0)))
        dims = {len(r.values) for r in records}
        if len(dims) != 1:
            raise ShapeError(f"VectorSet: разные размерности векторов {sorted(dims)}")
        return cls([r.utterance_id for r in records], [r.values for r in records])

    def to_records(self) -> list[SpeakerVector]:
        return [
            SpeakerVector(utterance_id=utt, values=row.tolist())
            for utt, row in zip(self.ids, self.matrix)
        ]
