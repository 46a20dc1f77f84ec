"""
Синтетический размеченный корпус для прогонов на одной машине.

Диктор - смесь трёх гармоник своего основного тона; высказывание -
та же смесь со случайными фазами и шумом (SNR ~10 дБ). Вместе с WAV
генерируется 400-мерный "i-vector": центроид диктора + гауссов шум.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from features.wav import WavAudio, write_wav
from schemas.records import ManifestEntry
from settings import SAMPLE_RATE, SPEAKER_VECTOR_DIM
from utils.io import write_json
from vectorspace.collection import VectorSet
from vectorspace.io import write_manifest, write_vectors

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
VECTORS_NAME = "ivectors.jsonl"
WAV_DIR = "wav"


@dataclass(frozen=True)
class SynthCorpus:
    manifest: list[ManifestEntry]
    vectors: VectorSet
    root: Path | None = None
    speaker_of: dict[str, str] = field(default_factory=dict)


def utterance_id(speaker: int, utterance: int) -> str:
    return f"spk{speaker:03d}-utt{utterance:03d}"


def _check_sizes(num_speakers: int, utts_per_speaker: int) -> None:
    if num_speakers < 2:
        raise ValueError(f"synth_corpus: нужно ≥ 2 дикторов, получено {num_speakers}")
    if utts_per_speaker < 1:
        raise ValueError("synth_corpus: нужно ≥ 1 высказывания на диктора")


def synth_vectors(
    num_speakers: int,
    utts_per_speaker: int,
    seed: int,
    dim: int = SPEAKER_VECTOR_DIM,
    noise: float = 0.3,
) -> tuple[VectorSet, dict[str, str]]:
    """
    Только векторная часть корпуса: центроид N(0, I) на диктора
    плюс шум N(0, noise²·I) на высказывание.

    :return: Векторы и отображение id -> диктор
    """
    _check_sizes(num_speakers, utts_per_speaker)
    _, vector_seq = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(vector_seq)
    centroids = rng.standard_normal((num_speakers, dim))
    ids, rows, speaker_of = [], [], {}
    for s in range(num_speakers):
        for u in range(utts_per_speaker):
            utt = utterance_id(s, u)
            ids.append(utt)
            rows.append(centroids[s] + noise * rng.standard_normal(dim))
            speaker_of[utt] = f"spk{s:03d}"
    return VectorSet(ids, np.stack(rows)), speaker_of


def _speaker_voice(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    f0 = rng.uniform(100.0, 300.0)
    harmonics = rng.choice(np.arange(1, 16), size=3, replace=False)
    weights = rng.uniform(0.2, 1.0, size=3)
    return f0 * harmonics, 0.3 * weights / weights.sum()


def synth_utterance(
    frequencies: np.ndarray,
    amplitudes: np.ndarray,
    rng: np.random.Generator,
    duration: float = 4.0,
    sample_rate: int = SAMPLE_RATE,
    snr_db: float = 10.0,
) -> WavAudio:
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(frequencies))
    waves = np.sin(2.0 * np.pi * frequencies[:, None] * t + phases[:, None])
    signal = (amplitudes[:, None] * waves).sum(axis=0)
    noise_std = np.sqrt(np.mean(signal**2) / 10.0 ** (snr_db / 10.0))
    return WavAudio(sample_rate, signal + noise_std * rng.standard_normal(len(t)))


def synth_corpus(
    num_speakers: int,
    utts_per_speaker: int,
    seed: int,
    out_dir=None,
    duration: float = 4.0,
    sample_rate: int = SAMPLE_RATE,
    snr_db: float = 10.0,
    dim: int = SPEAKER_VECTOR_DIM,
    vector_noise: float = 0.3,
) -> SynthCorpus:
    """
    Генерирует корпус; при out_dir пишет wav/<id>.wav, manifest.jsonl
    (пути относительно out_dir) и ivectors.jsonl.

    Одинаковое зерно даёт побайтно одинаковый корпус.
    """
    _check_sizes(num_speakers, utts_per_speaker)
    audio_seq, _ = np.random.SeedSequence(seed).spawn(2)
    vectors, speaker_of = synth_vectors(num_speakers, utts_per_speaker, seed, dim, vector_noise)
    root = Path(out_dir) if out_dir is not None else None

    manifest: list[ManifestEntry] = []
    for s, speaker_seq in enumerate(audio_seq.spawn(num_speakers)):
        voice_seq, *utt_seqs = speaker_seq.spawn(utts_per_speaker + 1)
        frequencies, amplitudes = _speaker_voice(np.random.default_rng(voice_seq))
        for u, utt_seq in enumerate(utt_seqs):
            utt = utterance_id(s, u)
            rel_path = f"{WAV_DIR}/{utt}.wav"
            if root is not None:
                audio = synth_utterance(
                    frequencies,
                    amplitudes,
                    np.random.default_rng(utt_seq),
                    duration,
                    sample_rate,
                    snr_db,
                )
                write_wav(root / rel_path, audio)
            manifest.append(ManifestEntry(id=utt, path=rel_path, speaker=speaker_of[utt]))

    if root is not None:
        write_manifest(root / MANIFEST_NAME, manifest)
        write_vectors(root / VECTORS_NAME, vectors)
        write_json(
            root / "corpus.json",
            {
                "num_speakers": num_speakers,
                "utts_per_speaker": utts_per_speaker,
                "seed": seed,
                "duration": duration,
                "sample_rate": sample_rate,
                "snr_db": snr_db,
                "vector_noise": vector_noise,
            },
        )
        logger.info(
            f"📦 Синтетический корпус: {num_speakers} дикторов × {utts_per_speaker} "
            f"высказываний в {root}"
        )
    return SynthCorpus(manifest=manifest, vectors=vectors, root=root, speaker_of=speaker_of)
