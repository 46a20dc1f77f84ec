"""
Списки трайлов и файлы оценок.

Трайлы: "<label 0|1> <enroll_id> <test_id>" (метка необязательна).
Оценки: "<enroll_id> <test_id> <score:%.6f>".
"""

from __future__ import annotations

import logging
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from schemas.records import ScoreSet, Trial, TrialLabel
from utils.exceptions import ScoreAlignmentError
from utils.io import ensure_parent, require_file

logger = logging.getLogger(__name__)

_LABELS = {"1": TrialLabel.TARGET, "0": TrialLabel.NONTARGET}


def read_trials(path) -> list[Trial]:
    trials = []
    with require_file(path).open("r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) == 3 and parts[0] in _LABELS:
                trials.append(
                    Trial(enroll_id=parts[1], test_id=parts[2], label=_LABELS[parts[0]])
                )
            elif len(parts) == 2:
                trials.append(Trial(enroll_id=parts[0], test_id=parts[1]))
            else:
                logger.error(f"❌ {path}:{number}: неверная строка трайла: {line.strip()!r}")
                raise ValueError(f"{path}:{number}: ожидается '[0|1] <enroll> <test>'")
    return trials


def write_trials(path, trials: Sequence[Trial]) -> Path:
    path = ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for trial in trials:
            prefix = "" if trial.label is None else ("1 " if trial.is_target else "0 ")
            fh.write(f"{prefix}{trial.enroll_id} {trial.test_id}\n")
    return path


def write_scores(path, scoreset: ScoreSet) -> Path:
    path = ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for trial, score in zip(scoreset.trials, scoreset.scores):
            fh.write(f"{trial.enroll_id} {trial.test_id} {score:.6f}\n")
    return path


def read_scores(path, system_name: str, trials: Sequence[Trial] | None = None) -> ScoreSet:
    """
    Читает файл оценок; если переданы трайлы, сверяет порядок и
    переносит метки.

    :raises ScoreAlignmentError: Пары (enroll, test) не совпадают с трайлами
    """
    pairs, scores = [], []
    with require_file(path).open("r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{number}: ожидается '<enroll> <test> <score>'")
            pairs.append((parts[0], parts[1]))
            scores.append(float(parts[2]))

    if trials is None:
        resolved = [Trial(enroll_id=e, test_id=t) for e, t in pairs]
    else:
        check_alignment([(t.enroll_id, t.test_id) for t in trials], pairs)
        resolved = list(trials)
    return ScoreSet(system_name=system_name, trials=resolved, scores=scores)


def check_alignment(
    reference: Sequence[tuple[str, str]], other: Sequence[tuple[str, str]]
) -> None:
    """Списки пар должны совпадать поэлементно."""
    for index, (a, b) in enumerate(zip(reference, other)):
        if a != b:
            raise ScoreAlignmentError(index, f"{a} != {b}")
    if len(reference) != len(other):
        raise ScoreAlignmentError(
            min(len(reference), len(other)), f"длины {len(reference)} и {len(other)}"
        )


def build_trials(
    ids: Sequence[str],
    speaker_of: Mapping[str, str],
    num_trials: int,
    seed: int,
) -> list[Trial]:
    """
    Сбалансированный размеченный список трайлов: поровну target и nontarget
    (при нечётном num_trials nontarget на один больше).

    Пары неупорядоченные, без повторов, enroll != test.

    :raises ValueError: Не хватает target или nontarget пар
    """
    rng = np.random.default_rng(seed)
    ordered = sorted(ids)
    targets, nontargets = [], []
    for a, b in combinations(ordered, 2):
        (targets if speaker_of[a] == speaker_of[b] else nontargets).append((a, b))

    n_target = num_trials // 2
    n_nontarget = num_trials - n_target
    if len(targets) < n_target or len(nontargets) < n_nontarget:
        raise ValueError(
            f"build_trials: нужно {n_target}/{n_nontarget} target/nontarget, "
            f"доступно {len(targets)}/{len(nontargets)}"
        )

    target_rows = rng.choice(len(targets), n_target, replace=False)
    nontarget_rows = rng.choice(len(nontargets), n_nontarget, replace=False)
    chosen = [
        Trial(enroll_id=targets[i][0], test_id=targets[i][1], label=TrialLabel.TARGET)
        for i in target_rows
    ] + [
        Trial(enroll_id=nontargets[i][0], test_id=nontargets[i][1], label=TrialLabel.NONTARGET)
        for i in nontarget_rows
    ]
    trials = [chosen[i] for i in rng.permutation(len(chosen))]
    logger.info(f"✅ Трайлов: {len(trials)} ({n_target} target, {n_nontarget} nontarget)")
    return trials
