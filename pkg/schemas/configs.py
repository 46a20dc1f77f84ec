"""
Pydantic схемы конфигураций стадий пайплайна.

Инварианты из предметной области выражены ограничениями полей и
валидаторами: нарушение превращается в ValidationError (код выхода 3).
"""

from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from settings import CROP_FRAMES, N_MELS, SAMPLE_RATE, SPEAKER_VECTOR_DIM


class OptimizerConfig(BaseModel):
    """
    Настройки оптимизатора.

    decay_mode="lr" - обратное по времени затухание шага
    lr_t = lr0 / (1 + lr_decay * t), t - номер мини-батча;
    decay_mode="weight" - L2-штраф lr_decay * p к градиенту.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["sgd", "adam"] = "sgd"
    # 0 допустим: "замороженное" обучение для проверок
    learning_rate: float = Field(default=0.01, ge=0.0)
    lr_decay: float = Field(default=0.0, ge=0.0)
    decay_mode: Literal["lr", "weight"] = "lr"
    batch_size: int = Field(default=100, ge=1)
    adam_beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)

    @classmethod
    def adam_defaults(cls, **overrides) -> "OptimizerConfig":
        """Adam без гиперпараметров в статье: lr=1e-4, β1=0.9, β2=0.999, ε=1e-8."""
        values = {"kind": "adam", "learning_rate": 1e-4, "batch_size": 32}
        values.update(overrides)
        return cls(**values)


class ImpostorRule(str, Enum):
    """Как порог применяется к кандидатам-импостерам из B"""

    # фильтр по порогу, затем top-k (самые "трудные" из допустимых)
    HARDEST_TOP_K = "hardest_top_k"
    # та же семантика под вторым именем
    TOP_K_BELOW_THRESHOLD = "top_k_below_threshold"
    # сначала top-k, затем отбрасываем превысивших порог
    TOP_K_THEN_THRESHOLD = "top_k_then_threshold"


class MiningConfig(BaseModel):
    """Параметры самообучаемого отбора клиентов и импостеров"""

    model_config = ConfigDict(frozen=True)

    k: int = Field(default=10, ge=1)
    client_threshold: float = Field(default=0.5, ge=-1.0, le=1.0)
    impostor_threshold: float = Field(default=1.0, ge=-1.0, le=1.0)
    impostor_rule: ImpostorRule = ImpostorRule.HARDEST_TOP_K
    full_cross_triplets: bool = False
    chunk_size: int = Field(default=256, ge=1)
    subset_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)


class AETrainConfig(BaseModel):
    """Обучение автоэнкодера ближайших соседей (System-1)"""

    model_config = ConfigDict(frozen=True)

    dims: list[int] = Field(
        default_factory=lambda: [SPEAKER_VECTOR_DIM, 300, 200, 300, SPEAKER_VECTOR_DIM]
    )
    epochs: int = Field(default=100, ge=1)
    optimizer: OptimizerConfig = Field(
        default_factory=lambda: OptimizerConfig(
            kind="sgd", learning_rate=0.01, lr_decay=0.0002, batch_size=100
        )
    )
    neighbor_k: int = Field(default=15, ge=1)
    seed: int = Field(default=0, ge=0)
    length_normalize: bool = False

    @field_validator("dims")
    @classmethod
    def check_symmetric(cls, dims: list[int]) -> list[int]:
        if len(dims) < 3 or len(dims) % 2 == 0:
            raise ValueError("dims: нужно нечётное число слоёв (вход, ..., выход)")
        if dims != dims[::-1]:
            raise ValueError(f"dims: энкодер и декодер должны быть симметричны: {dims}")
        if any(d < 1 for d in dims):
            raise ValueError("dims: размеры слоёв должны быть положительными")
        return dims


class MelConfig(BaseModel):
    """STFT (окно Ханна 25 мс, шаг 10 мс) + 80 треугольных мел-фильтров"""

    model_config = ConfigDict(frozen=True)

    sample_rate: int = Field(default=SAMPLE_RATE, gt=0)
    win_ms: float = Field(default=25.0, gt=0.0)
    hop_ms: float = Field(default=10.0, gt=0.0)
    n_fft: Optional[int] = Field(default=None, ge=1)
    n_mels: int = Field(default=N_MELS, ge=1)
    fmin: float = Field(default=20.0, ge=0.0)
    fmax: Optional[float] = None
    log_floor: float = Field(default=1e-10, gt=0.0)
    mean_normalize: bool = False

    @property
    def win_length(self) -> int:
        return int(round(self.sample_rate * self.win_ms / 1000.0))

    @property
    def hop_length(self) -> int:
        return int(round(self.sample_rate * self.hop_ms / 1000.0))

    @property
    def fft_size(self) -> int:
        if self.n_fft is not None:
            return max(self.n_fft, self.win_length)
        return 1 << (self.win_length - 1).bit_length()

    @property
    def upper_frequency(self) -> float:
        return self.fmax if self.fmax is not None else self.sample_rate / 2.0

    @model_validator(mode="after")
    def check_range(self) -> "MelConfig":
        if self.upper_frequency <= self.fmin:
            raise ValueError("fmax должна быть больше fmin")
        if self.upper_frequency > self.sample_rate / 2.0:
            raise ValueError("fmax не может превышать частоту Найквиста")
        return self


class CropConfig(BaseModel):
    """Случайное окно из N кадров для обучения"""

    model_config = ConfigDict(frozen=True)

    window_length: int = Field(default=CROP_FRAMES, ge=1)
    seed: int = Field(default=0, ge=0)


class EncoderProfile(BaseModel):
    """
    Архитектура VGG-энкодера и головы двухветочной сети.

    full - размеры из таблицы архитектуры (128/256/512 каналов, fc 1024→400);
    tiny - уменьшенный профиль для проверок градиента и быстрых прогонов.
    """

    model_config = ConfigDict(frozen=True)

    name: str = "full"
    n_mels: int = Field(default=N_MELS, ge=8)
    channels: tuple[int, int, int] = (128, 256, 512)
    attention_dim: int = Field(default=128, ge=1)
    fc_dims: tuple[int, int] = (1024, SPEAKER_VECTOR_DIM)
    head_dims: tuple[int, ...] = (1024, 512, 256, 64)

    @classmethod
    def preset(cls, name: str, **overrides) -> "EncoderProfile":
        presets = {
            "full": {},
            "tiny": {
                "n_mels": 8,
                "channels": (8, 16, 32),
                "attention_dim": 8,
                "fc_dims": (64, 25),
                "head_dims": (64, 32, 16, 8),
            },
        }
        if name not in presets:
            raise ValueError(f"Неизвестный профиль энкодера: {name}")
        return cls(name=name, **{**presets[name], **overrides})

    @property
    def pooled_bins(self) -> int:
        return self.n_mels // 8

    @property
    def sap_dim(self) -> int:
        """D = каналы × частоты после третьего пулинга (512 × 10 = 5120)"""
        return self.channels[2] * self.pooled_bins

    @property
    def embedding_dim(self) -> int:
        return self.fc_dims[1]


class SiameseTrainConfig(BaseModel):
    """Обучение двух- и трёхветочной сиамских сетей (System-2/3)"""

    model_config = ConfigDict(frozen=True)

    profile: str = "full"
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig.adam_defaults)
    epochs: int = Field(default=10, ge=1)
    crop_frames: int = Field(default=CROP_FRAMES, ge=8)
    seed: int = Field(default=0, ge=0)
    margin: float = Field(default=0.2, ge=0.0)
    max_pairs_per_epoch: Optional[int] = Field(default=None, ge=1)
    zero_init_head: bool = True

    @property
    def batch_size(self) -> int:
        return self.optimizer.batch_size


class DcfParams(BaseModel):
    """Параметры функции стоимости обнаружения (по умолчанию p_target=0.05, единичные стоимости)"""

    model_config = ConfigDict(frozen=True)

    c_miss: float = Field(default=1.0, gt=0.0)
    c_fa: float = Field(default=1.0, gt=0.0)
    p_target: float = Field(default=0.05, gt=0.0, lt=1.0)


class FusionWeights(BaseModel):
    """Веса α, β формулы слияния оценок трёх систем"""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.30, ge=0.0, le=1.0)
    beta: float = Field(default=0.79, ge=0.0, le=1.0)
