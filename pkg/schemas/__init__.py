"""
Pydantic схемы для валидации данных
"""

from .configs import (
    AETrainConfig,
    CropConfig,
    DcfParams,
    EncoderProfile,
    FusionWeights,
    ImpostorRule,
    MelConfig,
    MiningConfig,
    OptimizerConfig,
    SiameseTrainConfig,
)
from .records import (
    FusionSearch,
    ManifestEntry,
    MetricsReport,
    MiningArtifacts,
    MiningReport,
    PurityReport,
    RunReport,
    ScoreSet,
    SpeakerVector,
    SubsetSplit,
    TrainHistory,
    Trial,
    TrialLabel,
)
from .schemas import Artifact, Run

__all__ = [
    "OptimizerConfig",
    "ImpostorRule",
    "MiningConfig",
    "AETrainConfig",
    "MelConfig",
    "CropConfig",
    "EncoderProfile",
    "SiameseTrainConfig",
    "DcfParams",
    "FusionWeights",
    "SpeakerVector",
    "ManifestEntry",
    "SubsetSplit",
    "TrialLabel",
    "Trial",
    "ScoreSet",
    "PurityReport",
    "MiningReport",
    "TrainHistory",
    "MetricsReport",
    "RunReport",
    "MiningArtifacts",
    "FusionSearch",
    "Run",
    "Artifact",
]
