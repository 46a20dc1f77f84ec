"""
Чтение и запись RIFF/WAVE PCM-16.

Разбор чанков ручной (struct), чтобы ошибки сообщали смещение в байтах.
"""

from __future__ import annotations

import logging
import struct
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from utils.exceptions import WavParseError
from utils.io import ensure_parent, require_file

logger = logging.getLogger(__name__)

_PCM = 1
_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class WavAudio:
    """Моно-сигнал в [−1, 1] и частота дискретизации"""

    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"WavAudio: sample_rate={self.sample_rate} должна быть > 0")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _parse_fmt(raw: bytes, body: int, size: int) -> tuple[int, int, int, int]:
    if size < 16:
        raise WavParseError("чанк fmt короче 16 байт", body - 8)
    audio_format, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", raw, body)
    if audio_format == _EXTENSIBLE and size >= 26:
        # первые два байта GUID подформата - код формата
        (audio_format,) = struct.unpack_from("<H", raw, body + 24)
    if audio_format != _PCM:
        raise WavParseError(f"формат {audio_format:#x} не PCM", body)
    if bits != 16:
        raise WavParseError(f"поддерживается только 16 бит, а не {bits}", body + 14)
    if channels < 1:
        raise WavParseError("число каналов должно быть ≥ 1", body + 2)
    if rate == 0:
        raise WavParseError("нулевая частота дискретизации", body + 4)
    return audio_format, channels, rate, bits


def read_wav(path) -> WavAudio:
    """
    Читает PCM-16 WAV; стерео сводится в моно усреднением каналов.

    Отсчёты нормируются делением на 32768.

    :raises WavParseError: Не RIFF/WAVE, не PCM-16, обрезанный чанк
    """
    raw = require_file(path).read_bytes()
    if len(raw) < 12:
        raise WavParseError("файл короче заголовка RIFF", 0)
    riff, _, wave_id = struct.unpack_from("<4sI4s", raw, 0)
    if riff != b"RIFF":
        raise WavParseError(f"ожидалась сигнатура RIFF, получено {riff!r}", 0)
    if wave_id != b"WAVE":
        raise WavParseError(f"ожидался тип WAVE, получено {wave_id!r}", 8)

    fmt = None
    data_span = None
    offset = 12
    while offset + 8 <= len(raw):
        chunk_id, size = struct.unpack_from("<4sI", raw, offset)
        body = offset + 8
        if body + size > len(raw):
            raise WavParseError(
                f"чанк {chunk_id!r} обрезан: объявлено {size} байт, "
                f"доступно {len(raw) - body}",
                offset,
            )
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(raw, body, size)
        elif chunk_id == b"data":
            data_span = (body, size)
        offset = body + size + (size & 1)

    if fmt is None:
        raise WavParseError("нет чанка fmt", 12)
    if data_span is None:
        raise WavParseError("нет чанка data", offset)
    _, channels, rate, _ = fmt
    body, size = data_span
    frame_bytes = 2 * channels
    if size % frame_bytes:
        raise WavParseError(
            f"размер data {size} не кратен размеру кадра {frame_bytes}", body - 4
        )

    pcm = np.frombuffer(raw, dtype="<i2", count=size // 2, offset=body)
    samples = pcm.astype(np.float64).reshape(-1, channels).mean(axis=1) / 32768.0
    return WavAudio(sample_rate=rate, samples=samples)


def write_wav(path, audio: WavAudio) -> Path:
    """Пишет моно PCM-16; значения вне [−1, 1) обрезаются."""
    path = ensure_parent(path)
    pcm = np.clip(np.round(audio.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(audio.sample_rate)
        fh.writeframes(pcm.tobytes())
    return path
