"""
Разбиение манифеста: подмножества A и B для отбора,
отложенные высказывания для трайлов.
"""

import logging
import math
from collections import defaultdict
from typing import Sequence

import numpy as np

from schemas.records import ManifestEntry, SubsetSplit

logger = logging.getLogger(__name__)


def _head_size(fraction: float, total: int) -> int:
    size = int(math.floor(fraction * total + 0.5))
    if total >= 2:
        return min(max(size, 1), total - 1)
    return total


def split_subsets(
    manifest: Sequence[ManifestEntry],
    fraction: float,
    seed: int,
    by_speaker: bool = True,
) -> SubsetSplit:
    """
    Детерминированное псевдослучайное разбиение манифеста.

    Если у всех записей есть метка диктора и by_speaker=True, делим
    дикторов целиком: ни один диктор не попадает в оба подмножества.
    Иначе делим высказывания. Порядок внутри подмножеств - как в манифесте.

    :param fraction: Доля для A, 0 < fraction < 1
    :raises ValueError: Пустой манифест или fraction вне (0, 1)
    """
    if not manifest:
        logger.error("❌ split_subsets: пустой манифест")
        raise ValueError("split_subsets: пустой манифест")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"split_subsets: fraction={fraction} вне (0, 1)")

    rng = np.random.default_rng(seed)
    labeled = all(entry.speaker is not None for entry in manifest)
    if by_speaker and labeled:
        speakers = sorted({entry.speaker for entry in manifest})
        shuffled = [speakers[i] for i in rng.permutation(len(speakers))]
        chosen = set(shuffled[: _head_size(fraction, len(speakers))])
        in_a = [entry.speaker in chosen for entry in manifest]
        logger.info(f"Разбиение по дикторам: {len(chosen)} из {len(speakers)} в A")
    else:
        ids = [entry.id for entry in manifest]
        shuffled = [ids[i] for i in rng.permutation(len(ids))]
        chosen = set(shuffled[: _head_size(fraction, len(ids))])
        in_a = [entry.id in chosen for entry in manifest]

    return SubsetSplit(
        subset_a=[e.id for e, flag in zip(manifest, in_a) if flag],
        subset_b=[e.id for e, flag in zip(manifest, in_a) if not flag],
    )


def split_heldout(
    manifest: Sequence[ManifestEntry], heldout_per_speaker: int
) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    """
    Последние heldout_per_speaker высказываний каждого диктора (в порядке
    манифеста) уходят в оценку, остальные - в обучение.

    Метки дикторов нужны только здесь и при построении трайлов.

    :return: (обучение, оценка), порядок как в манифесте
    :raises ValueError: Нет меток диктора или у диктора слишком мало записей
    """
    if any(entry.speaker is None for entry in manifest):
        logger.error("❌ split_heldout: у части записей нет метки диктора")
        raise ValueError("split_heldout: нужны метки дикторов")

    by_speaker: dict[str, list[str]] = defaultdict(list)
    for entry in manifest:
        by_speaker[entry.speaker].append(entry.id)

    heldout: set[str] = set()
    for speaker, ids in by_speaker.items():
        if len(ids) <= heldout_per_speaker:
            raise ValueError(
                f"split_heldout: у диктора {speaker} {len(ids)} высказываний, "
                f"нужно больше {heldout_per_speaker}"
            )
        heldout.update(ids[-heldout_per_speaker:])

    train = [entry for entry in manifest if entry.id not in heldout]
    evaluation = [entry for entry in manifest if entry.id in heldout]
    logger.info(f"Отложено для трайлов: {len(evaluation)}, для обучения: {len(train)}")
    return train, evaluation
