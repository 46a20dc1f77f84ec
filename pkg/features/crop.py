"""
Окна фиксированной длины из спектрограмм.
"""

import math

import numpy as np

from schemas.configs import CropConfig


def wrap_pad(matrix: np.ndarray, min_frames: int) -> np.ndarray:
    """Короткое высказывание повторяется по времени до ≥ min_frames кадров."""
    frames = matrix.shape[1]
    if frames >= min_frames:
        return matrix
    return np.tile(matrix, (1, math.ceil(min_frames / frames)))


def random_crop(
    matrix: np.ndarray,
    config: CropConfig,
    rng: np.random.Generator | None = None,
    return_offset: bool = False,
):
    """
    Непрерывный срез из N = config.window_length кадров со случайным сдвигом.

    Высказывания короче N сначала дополняются повтором (wrap_pad).

    :param rng: Генератор; по умолчанию создаётся из config.seed
    :return: Матрица bins×N (и сдвиг, если return_offset)
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    length = config.window_length
    padded = wrap_pad(matrix, length)
    offset = int(rng.integers(0, padded.shape[1] - length + 1))
    crop = padded[:, offset : offset + length]
    return (crop, offset) if return_offset else crop
