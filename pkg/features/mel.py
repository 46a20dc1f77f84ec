"""
Лог-мел спектрограмма: STFT с окном Ханна, спектр мощности,
треугольные мел-фильтры (шкала HTK), натуральный логарифм с полом.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from features.wav import WavAudio
from schemas.configs import MelConfig
from utils.exceptions import ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MelSpectrogram:
    """Матрица bins×frames логарифмов энергий одного высказывания"""

    utterance_id: str
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] < 1:
            raise ShapeError(f"MelSpectrogram: ожидается bins×T, T ≥ 1, а не {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError(f"MelSpectrogram {self.utterance_id}: NaN/Inf в признаках")

    @property
    def bins(self) -> int:
        return self.data.shape[0]

    @property
    def frames(self) -> int:
        return self.data.shape[1]


def hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(config: MelConfig) -> np.ndarray:
    """
    Треугольные фильтры n_mels × (n_fft/2 + 1), равномерно по мел-шкале
    от fmin до fmax (по умолчанию sr/2).
    """
    n_fft = config.fft_size
    freqs = np.arange(n_fft // 2 + 1) * config.sample_rate / n_fft
    edges = mel_to_hz(
        np.linspace(hz_to_mel(config.fmin), hz_to_mel(config.upper_frequency), config.n_mels + 2)
    )
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs[None, :] - lower) / (center - lower)
    falling = (upper - freqs[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def frame_count(num_samples: int, config: MelConfig) -> int:
    """T = 1 + floor((len − win) / hop)"""
    return 1 + (num_samples - config.win_length) // config.hop_length


def mel_spectrogram(
    audio: WavAudio, config: MelConfig, utterance_id: str = ""
) -> MelSpectrogram:
    """
    Считает лог-мел спектрограмму.

    :raises ShapeError: Сигнал короче одного окна
    :raises ValueError: Частота дискретизации не совпадает с конфигом
    """
    if audio.sample_rate != config.sample_rate:
        raise ValueError(
            f"mel_spectrogram: {audio.sample_rate} Гц, конфиг ждёт {config.sample_rate} Гц"
        )
    win, hop = config.win_length, config.hop_length
    if len(audio.samples) < win:
        raise ShapeError(
            f"mel_spectrogram: {len(audio.samples)} отсчётов меньше окна {win}"
        )

    frames = sliding_window_view(audio.samples, win)[::hop]
    # периодическое окно Ханна
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(win) / win)
    spectrum = np.fft.rfft(frames * window, n=config.fft_size, axis=1)
    power = spectrum.real**2 + spectrum.imag**2
    energies = power @ mel_filterbank(config).T
    log_mel = np.log(np.maximum(energies, config.log_floor)).T
    if config.mean_normalize:
        log_mel = log_mel - log_mel.mean(axis=1, keepdims=True)
    return MelSpectrogram(utterance_id=utterance_id, data=log_mel)
