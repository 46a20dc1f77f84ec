"""
Конфигурация приложения через Pydantic Settings

Settings - окружение процесса (реестр запусков, логирование).
PipelineConfig - параметры всех стадий пайплайна; приоритет источников:
флаги CLI > переменные окружения SSV_* > JSON-файл > значения по умолчанию.
"""

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from schemas.configs import (
    AETrainConfig,
    DcfParams,
    FusionWeights,
    MelConfig,
    MiningConfig,
    SiameseTrainConfig,
)
from settings import DB_NAME
from utils.io import read_json


class Settings(BaseSettings):
    """Настройки приложения"""

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    registry_db: str = DB_NAME
    db_echo: bool = False
    log_dir: str = "./logs"
    log_level: str = "INFO"


# Единственный экземпляр настроек
settings = Settings()


class PathsConfig(BaseModel):
    """
    Раскладка артефактов внутри рабочего каталога.

    manifest / ivectors / open_vectors можно указать явно (реальные данные);
    иначе берутся файлы синтетического корпуса.
    """

    model_config = ConfigDict(frozen=True)

    work_dir: str = "work"
    manifest: Optional[str] = None
    ivectors: Optional[str] = None
    # Open track: векторы подмножества B из отдельного файла
    open_vectors: Optional[str] = None

    @property
    def root(self) -> Path:
        return Path(self.work_dir)

    @property
    def corpus_dir(self) -> Path:
        return self.root / "corpus"

    @property
    def manifest_path(self) -> Path:
        return Path(self.manifest) if self.manifest else self.corpus_dir / "manifest.jsonl"

    @property
    def ivectors_path(self) -> Path:
        return Path(self.ivectors) if self.ivectors else self.corpus_dir / "ivectors.jsonl"

    @property
    def train_manifest(self) -> Path:
        return self.corpus_dir / "train.jsonl"

    @property
    def eval_manifest(self) -> Path:
        return self.corpus_dir / "eval.jsonl"

    @property
    def features_dir(self) -> Path:
        return self.root / "features"

    @property
    def mining_dir(self) -> Path:
        return self.root / "mining"

    @property
    def models_dir(self) -> Path:
        return self.root / "models"

    @property
    def vectors_dir(self) -> Path:
        return self.root / "vectors"

    @property
    def trials_dir(self) -> Path:
        return self.root / "trials"

    @property
    def scores_dir(self) -> Path:
        return self.root / "scores"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"


class CorpusConfig(BaseModel):
    """Синтетический корпус и списки трайлов"""

    model_config = ConfigDict(frozen=True)

    synthetic: bool = True
    num_speakers: int = Field(default=20, ge=2)
    utts_per_speaker: int = Field(default=10, ge=2)
    duration: float = Field(default=4.0, gt=0.0)
    snr_db: float = 10.0
    vector_noise: float = Field(default=0.3, ge=0.0)
    # последние высказывания каждого диктора - для трайлов, не для обучения
    heldout_per_speaker: int = Field(default=5, ge=2)
    num_trials: int = Field(default=200, ge=2)

    @model_validator(mode="after")
    def check_heldout(self) -> "CorpusConfig":
        if self.heldout_per_speaker >= self.utts_per_speaker:
            raise ValueError("heldout_per_speaker должно быть меньше utts_per_speaker")
        return self


class EvalConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    dcf: DcfParams = DcfParams()
    fusion: FusionWeights = FusionWeights()
    grid_step: float = Field(default=0.01, gt=0.0, le=1.0)
    normalize: bool = False


class PipelineConfig(BaseSettings):
    """
    Полная конфигурация пайплайна.

    Зерно верхнего уровня распространяется на стадии (ae.seed, siamese.seed),
    поэтому SSV_SEED меняет все случайные потоки сразу.
    """

    model_config = SettingsConfigDict(
        env_prefix="SSV_", env_nested_delimiter="__", extra="forbid"
    )

    seed: int = Field(default=0, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)
    paths: PathsConfig = PathsConfig()
    corpus: CorpusConfig = CorpusConfig()
    features: MelConfig = MelConfig()
    mining: MiningConfig = MiningConfig()
    ae: AETrainConfig = AETrainConfig()
    siamese: SiameseTrainConfig = SiameseTrainConfig()
    eval: EvalConfig = EvalConfig()

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # окружение важнее содержимого JSON-файла, переданного через init
        return env_settings, init_settings

    @model_validator(mode="after")
    def propagate_seed(self) -> "PipelineConfig":
        self.ae = self.ae.model_copy(update={"seed": self.seed})
        self.siamese = self.siamese.model_copy(update={"seed": self.seed})
        return self

    @classmethod
    def load(cls, path=None, overrides: dict[str, Any] | None = None) -> "PipelineConfig":
        """
        JSON-файл (если задан) + окружение + точечные переопределения.

        :param overrides: Ключи вида "mining.k" -> значение (флаги CLI)
        """
        data = read_json(path) if path else {}
        return apply_overrides(cls(**data), overrides or {})

    @property
    def workers(self) -> int:
        return self.threads or os.cpu_count() or 1


def _nested(overrides: dict[str, Any]) -> dict[str, Any]:
    tree: dict[str, Any] = {}
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = tree
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node.setdefault(key, {})
        node[leaf] = value
    return tree


def _deep_merge(base: dict, update: dict) -> dict:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def apply_overrides(config: PipelineConfig, overrides: dict[str, Any]) -> PipelineConfig:
    """
    Возвращает новую конфигурацию с переопределениями поверх config.

    Значения None пропускаются (флаг не указан). Результат проходит полную
    валидацию, окружение повторно не читается.
    """
    tree = _nested(overrides)
    if not tree:
        return config
    merged = _deep_merge(config.model_dump(mode="json"), tree)
    return PipelineConfig.model_validate(merged)


def config_digest(config: PipelineConfig) -> str:
    """
    sha256 канонического JSON конфигурации.

    Пути и число потоков не влияют на содержимое артефактов и в дайджест
    не входят.
    """
    payload = config.model_dump(mode="json", exclude={"paths", "threads"})
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

