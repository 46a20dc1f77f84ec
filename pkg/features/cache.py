"""
Кэш признаков: один файл на высказывание.

Формат MSPC: b"MSPC" | u32 bins | u32 frames | float32 LE, row-major.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np

from utils.exceptions import MissingInputError, ShapeError
from utils.io import ensure_parent

logger = logging.getLogger(__name__)

MAGIC = b"MSPC"
SUFFIX = ".mspc"
_HEADER = struct.Struct("<4sII")


def write_feature_file(path, matrix: np.ndarray) -> Path:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ShapeError(f"write_feature_file: ожидается bins×T, получено {matrix.shape}")
    path = ensure_parent(path)
    bins, frames = matrix.shape
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, bins, frames))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())
    return path


def read_feature_file(path) -> np.ndarray:
    """
    Читает матрицу признаков bins×frames (float64).

    :raises MissingInputError: Файла нет
    :raises ShapeError: Неверная сигнатура или размер данных
    """
    path = Path(path)
    if not path.exists():
        raise MissingInputError(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ShapeError(f"{path}: файл короче заголовка MSPC")
    magic, bins, frames = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ShapeError(f"{path}: неверная сигнатура {magic!r}")
    expected = _HEADER.size + 4 * bins * frames
    if len(raw) != expected:
        raise ShapeError(f"{path}: ожидалось {expected} байт, в файле {len(raw)}")
    data = np.frombuffer(raw, dtype="<f4", count=bins * frames, offset=_HEADER.size)
    return data.astype(np.float64).reshape(bins, frames)


class FeatureStore:
    """
    Доступ к кэшу признаков по идентификатору высказывания.

    Загруженные матрицы держатся в памяти: обучение многократно
    обращается к одним и тем же высказываниям.
    """

    def __init__(self, root, cache: bool = True):
        self.root = Path(root)
        self.cache = cache
        self._loaded: dict[str, np.ndarray] = {}

    def path_for(self, utterance_id: str) -> Path:
        return self.root / f"{utterance_id}{SUFFIX}"

    def __contains__(self, utterance_id: str) -> bool:
        return utterance_id in self._loaded or self.path_for(utterance_id).exists()

    def get(self, utterance_id: str) -> np.ndarray:
        if utterance_id in self._loaded:
            return self._loaded[utterance_id]
        path = self.path_for(utterance_id)
        if not path.exists():
            logger.error(f"❌ Нет признаков для {utterance_id}: {path}")
            raise MissingInputError(path)
        matrix = read_feature_file(path)
        matrix.setflags(write=False)
        if self.cache:
            self._loaded[utterance_id] = matrix
        return matrix

    def put(self, utterance_id: str, matrix: np.ndarray) -> Path:
        path = write_feature_file(self.path_for(utterance_id), matrix)
        self._loaded.pop(utterance_id, None)
        return path

    def ids(self) -> list[str]:
        return sorted(p.name[: -len(SUFFIX)] for p in self.root.glob(f"*{SUFFIX}"))
