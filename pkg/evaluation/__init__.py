"""
Оценка трайлов, EER / minDCF, слияние систем и подбор весов.
"""

from .fusion import fuse_scores, min_max, tune_fusion
from .metrics import compute_dcf, compute_eer, compute_min_dcf, evaluate, evaluate_many
from .scoring import score_trials
from .trials import (
    build_trials,
    check_alignment,
    read_scores,
    read_trials,
    write_scores,
    write_trials,
)

__all__ = [
    "score_trials",
    "compute_eer",
    "compute_min_dcf",
    "compute_dcf",
    "evaluate",
    "evaluate_many",
    "fuse_scores",
    "min_max",
    "tune_fusion",
    "build_trials",
    "check_alignment",
    "read_trials",
    "write_trials",
    "read_scores",
    "write_scores",
]
