"""
Контейнер чекпоинта модели.

Формат: b"SSVM" | u32 версия | u32 длина манифеста | манифест (JSON, UTF-8) |
значения параметров float64 little-endian, row-major, в порядке манифеста.
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path

import numpy as np

from utils.exceptions import CheckpointFormatError, MissingInputError

logger = logging.getLogger(__name__)

MAGIC = b"SSVM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sII")


def save_checkpoint(path, state: dict[str, np.ndarray], meta: dict | None = None) -> Path:
    """
    Сохраняет именованные параметры в контейнер.

    :param path: Путь к файлу
    :param state: Имя -> массив значений (порядок словаря сохраняется)
    :param meta: Произвольные JSON-данные (архитектура, конфиг)
    :return: Путь к записанному файлу
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "params": [
            {"name": name, "shape": list(np.shape(value))} for name, value in state.items()
        ],
        "meta": meta or {},
    }
    manifest_bytes = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode(
        "utf-8"
    )
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(manifest_bytes)))
        fh.write(manifest_bytes)
        for value in state.values():
            fh.write(np.ascontiguousarray(value, dtype="<f8").tobytes())
    logger.info(f"📦 Чекпоинт сохранён: {path} ({len(state)} тензоров)")
    return path


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    """
    Читает контейнер чекпоинта.

    :return: (параметры по именам, meta)
    :raises MissingInputError: Файла нет
    :raises CheckpointFormatError: Неверная сигнатура, версия или обрезанный файл
    """
    path = Path(path)
    if not path.exists():
        raise MissingInputError(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointFormatError(f"{path}: файл короче заголовка")
    magic, version, manifest_len = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise CheckpointFormatError(f"{path}: неверная сигнатура {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(f"{path}: неподдерживаемая версия {version}")

    offset = _HEADER.size
    try:
        manifest = json.loads(raw[offset : offset + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"{path}: повреждён манифест: {e}") from e
    offset += manifest_len

    state: dict[str, np.ndarray] = {}
    for entry in manifest["params"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        end = offset + 8 * count
        if end > len(raw):
            raise CheckpointFormatError(
                f"{path}: обрезаны данные параметра {entry['name']} (смещение {offset})"
            )
        state[entry["name"]] = (
            np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
            .astype(np.float64)
            .reshape(shape)
        )
        offset = end
    if offset != len(raw):
        raise CheckpointFormatError(f"{path}: {len(raw) - offset} лишних байт в конце")
    return state, manifest.get("meta", {})
