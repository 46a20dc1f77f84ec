"""
Файловые форматы пространства векторов: векторы (JSON-lines), пары,
триплеты, манифест корпуса.
"""

import logging
from pathlib import Path

from schemas.records import ManifestEntry, SpeakerVector
from utils.io import ensure_parent, read_jsonl, require_file, write_jsonl
from vectorspace.collection import VectorSet

logger = logging.getLogger(__name__)


def read_vectors(path) -> VectorSet:
    """Читает {"id": ..., "vec": [...]} построчно."""
    vectors = VectorSet.from_records(read_jsonl(path, SpeakerVector))
    logger.info(f"Загружено {len(vectors)} векторов из {path}")
    return vectors


def write_vectors(path, vectors: VectorSet) -> Path:
    return write_jsonl(path, vectors.to_records())


def read_manifest(path) -> list[ManifestEntry]:
    return list(read_jsonl(path, ManifestEntry))


def write_manifest(path, entries: list[ManifestEntry]) -> Path:
    return write_jsonl(path, entries)


def write_pairs(path, pairs: list[tuple[str, str, int]]) -> Path:
    """Строки "<label 0|1> <anchor_id> <other_id>"."""
    path = ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for anchor, other, label in pairs:
            fh.write(f"{label} {anchor} {other}\n")
    return path


def read_pairs(path) -> list[tuple[str, str, int]]:
    pairs = []
    with require_file(path).open("r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3 or parts[0] not in ("0", "1"):
                raise ValueError(f"{path}:{number}: ожидается '<0|1> <anchor> <other>'")
            pairs.append((parts[1], parts[2], int(parts[0])))
    return pairs


def write_triplets(path, triplets: list[tuple[str, str, str]]) -> Path:
    """Строки "<anchor_id> <client_id> <impostor_id>"."""
    path = ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for anchor, client, impostor in triplets:
            fh.write(f"{anchor} {client} {impostor}\n")
    return path


def read_triplets(path) -> list[tuple[str, str, str]]:
    triplets = []
    with require_file(path).open("r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{number}: ожидается '<anchor> <client> <impostor>'")
            triplets.append((parts[0], parts[1], parts[2]))
    return triplets
