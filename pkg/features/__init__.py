"""
Чтение WAV, лог-мел признаки, случайные окна, кэш признаков
и синтетический корпус.
"""

from .cache import FeatureStore, read_feature_file, write_feature_file
from .crop import random_crop, wrap_pad
from .extract import featurize_manifest, resolve_audio_path
from .mel import MelSpectrogram, frame_count, hz_to_mel, mel_filterbank, mel_spectrogram, mel_to_hz
from .synth import SynthCorpus, synth_corpus, synth_vectors
from .wav import WavAudio, read_wav, write_wav

__all__ = [
    "WavAudio",
    "read_wav",
    "write_wav",
    "MelSpectrogram",
    "hz_to_mel",
    "mel_to_hz",
    "mel_filterbank",
    "mel_spectrogram",
    "frame_count",
    "wrap_pad",
    "random_crop",
    "FeatureStore",
    "read_feature_file",
    "write_feature_file",
    "featurize_manifest",
    "resolve_audio_path",
    "SynthCorpus",
    "synth_corpus",
    "synth_vectors",
]
