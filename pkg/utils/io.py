"""
Файловый обмен между стадиями: JSON-lines, дайджесты, sidecar-файлы.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Iterable, Iterator, Type, TypeVar

from pydantic import BaseModel

from utils.exceptions import MissingInputError

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)


def require_file(path) -> Path:
    """Проверяет, что входной артефакт существует."""
    path = Path(path)
    if not path.exists():
        logger.error(f"❌ Не найден входной файл: {path}")
        raise MissingInputError(path)
    return path


def ensure_parent(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def read_jsonl(path, model: Type[M]) -> Iterator[M]:
    """Читает JSON-lines, валидируя каждую строку схемой model."""
    with require_file(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield model.model_validate_json(line)


def write_jsonl(path, records: Iterable[BaseModel]) -> Path:
    path = ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record.model_dump_json(by_alias=True, exclude_none=True))
            fh.write("\n")
    return path


def write_json(path, payload) -> Path:
    """Детерминированный JSON: сортированные ключи, перевод строки в конце."""
    path = ensure_parent(path)
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


def read_json(path) -> dict:
    return json.loads(require_file(path).read_text(encoding="utf-8"))


def file_digest(path) -> str:
    """sha256 файла (или всех файлов каталога в отсортированном порядке)."""
    path = Path(path)
    digest = hashlib.sha256()
    files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
    for file in files:
        if path.is_dir():
            digest.update(str(file.relative_to(path)).encode("utf-8"))
        with file.open("rb") as fh:
            for block in iter(lambda: fh.read(1 << 20), b""):
                digest.update(block)
    return digest.hexdigest()


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_sidecar(path, stage: str, seed: int, config_digest: str, **extra) -> Path:
    """Sidecar артефакта: стадия, зерно и дайджест конфига (без времени)."""
    payload = {"stage": stage, "seed": seed, "config_digest": config_digest, **extra}
    return write_json(sidecar_path(path), payload)
