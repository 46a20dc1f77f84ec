"""
Извлечение признаков по манифесту корпуса в кэш MSPC.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from features.cache import FeatureStore
from features.mel import mel_spectrogram
from features.wav import read_wav
from schemas.configs import MelConfig
from schemas.records import ManifestEntry

logger = logging.getLogger(__name__)


def resolve_audio_path(entry: ManifestEntry, manifest_dir) -> Path:
    """Относительные пути манифеста считаются от его каталога."""
    path = Path(entry.path)
    return path if path.is_absolute() else Path(manifest_dir) / path


def featurize_manifest(
    entries: list[ManifestEntry],
    manifest_dir,
    out_dir,
    config: MelConfig,
    workers: int = 1,
) -> FeatureStore:
    """
    Считает лог-мел спектрограмму каждого высказывания и пишет её в out_dir.

    Файлы обрабатываются независимо, порядок записи не влияет на результат.
    """
    store = FeatureStore(out_dir, cache=False)

    def featurize_one(entry: ManifestEntry) -> int:
        audio = read_wav(resolve_audio_path(entry, manifest_dir))
        spec = mel_spectrogram(audio, config, utterance_id=entry.id)
        store.put(entry.id, spec.data)
        return spec.frames

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(featurize_one, entries))
    else:
        frames = [featurize_one(entry) for entry in entries]

    if frames:
        logger.info(
            f"✅ Признаки: {len(frames)} высказываний, {config.n_mels} мел-полос, "
            f"кадров от {min(frames)} до {max(frames)}"
        )
    return FeatureStore(out_dir)
