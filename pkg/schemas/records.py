"""
Pydantic схемы записей, которыми обмениваются стадии пайплайна
"""

import math
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from schemas.configs import DcfParams, FusionWeights


class SpeakerVector(BaseModel):
    """Вектор уровня высказывания (i-vector, ae-vector или эмбеддинг)"""

    model_config = ConfigDict(populate_by_name=True)

    utterance_id: str = Field(alias="id", min_length=1)
    values: list[float] = Field(alias="vec", min_length=1)

    @field_validator("values")
    @classmethod
    def check_finite(cls, values: list[float]) -> list[float]:
        if not all(math.isfinite(x) for x in values):
            raise ValueError("вектор содержит NaN/Inf")
        return values


class ManifestEntry(BaseModel):
    """Строка манифеста корпуса: {"id", "path", "speaker"?}"""

    id: str = Field(min_length=1)
    path: str
    speaker: Optional[str] = None


class SubsetSplit(BaseModel):
    """Два непересекающихся подмножества высказываний A и B"""

    subset_a: list[str]
    subset_b: list[str]

    @model_validator(mode="after")
    def check_disjoint(self) -> "SubsetSplit":
        overlap = set(self.subset_a) & set(self.subset_b)
        if overlap:
            raise ValueError(f"подмножества пересекаются: {sorted(overlap)[:5]}")
        return self


class TrialLabel(str, Enum):
    TARGET = "target"
    NONTARGET = "nontarget"


class Trial(BaseModel):
    """Один вопрос верификации: один ли диктор в enroll и test"""

    model_config = ConfigDict(frozen=True)

    enroll_id: str
    test_id: str
    label: Optional[TrialLabel] = None

    @property
    def is_target(self) -> bool:
        return self.label == TrialLabel.TARGET


class ScoreSet(BaseModel):
    """Оценки одной системы по упорядоченному списку трайлов"""

    system_name: str
    trials: list[Trial]
    scores: list[float]

    @model_validator(mode="after")
    def check_lengths(self) -> "ScoreSet":
        if len(self.trials) != len(self.scores):
            raise ValueError(
                f"{len(self.trials)} трайлов, но {len(self.scores)} оценок"
            )
        return self

    @property
    def is_labeled(self) -> bool:
        return bool(self.trials) and all(t.label is not None for t in self.trials)

    def score_array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=np.float64)

    def target_mask(self) -> np.ndarray:
        return np.array([t.is_target for t in self.trials], dtype=bool)


class PurityReport(BaseModel):
    """Качество отбора по истинным меткам (только для измерения)"""

    client_pair_purity: Optional[float] = None
    impostor_pair_purity: Optional[float] = None
    triplet_validity: Optional[float] = None


class MiningReport(BaseModel):
    anchors_processed: int = 0
    anchors_without_clients: int = 0
    anchors_without_impostors: int = 0
    client_pairs: int = 0
    impostor_pairs: int = 0
    pairs: int = 0
    triplets: int = 0
    purity: Optional[PurityReport] = None


class TrainHistory(BaseModel):
    """Средний лосс по эпохам (+ доля активных триплетов для System-3)"""

    epoch_losses: list[float] = []
    learning_rates: list[float] = []
    active_fractions: Optional[list[float]] = None


class MetricsReport(BaseModel):
    """Метрики одной системы на одном списке трайлов"""

    system: Optional[str] = None
    trials: int = 0
    eer: float
    eer_threshold: float
    min_dcf: float
    # None, если минимум достигается при пороге ±inf
    dcf_threshold: Optional[float] = None
    params: DcfParams = DcfParams()


class RunReport(BaseModel):
    """Отчёт о запуске стадии: дайджесты входов/выходов, время, счётчики"""

    stage: str
    seed: int
    config_digest: str
    status: str = "ok"
    wall_time: float = 0.0
    inputs: dict[str, str] = {}
    outputs: dict[str, str] = {}
    counters: dict[str, Any] = {}


class MiningArtifacts(BaseModel):
    """
    Результат отбора: ранжированные списки, пары и триплеты.

    pairs - (anchor, other, label), label 1 для клиента и 0 для импостера;
    triplets - (anchor, client, impostor).
    """

    neighbor_lists: dict[str, list[tuple[str, float]]] = {}
    impostor_lists: dict[str, list[tuple[str, float]]] = {}
    pairs: list[tuple[str, str, int]] = []
    triplets: list[tuple[str, str, str]] = []

    @model_validator(mode="after")
    def check_consistency(self) -> "MiningArtifacts":
        for anchor, other, label in self.pairs:
            if label not in (0, 1):
                raise ValueError(f"пара ({anchor}, {other}): метка {label} не 0/1")
        for anchor, client, impostor in self.triplets:
            if client == impostor:
                raise ValueError(f"триплет {anchor}: клиент совпадает с импостером")
        return self


class FusionSearch(BaseModel):
    """Результат перебора весов слияния и вся поверхность метрик"""

    weights: FusionWeights
    eer: float
    min_dcf: float
    grid: list[float]
    # surface_*[i][j] - значение для alpha=grid[i], beta=grid[j]
    surface_eer: list[list[float]]
    surface_min_dcf: list[list[float]]

    @property
    def evaluations(self) -> int:
        return len(self.grid) ** 2
