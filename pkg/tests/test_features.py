"""
Тесты аудио-входа: WAV, лог-мел, окна, кэш MSPC, синтетический корпус.
"""

import math
import struct

import numpy as np
import pytest

from features import (
    FeatureStore,
    WavAudio,
    featurize_manifest,
    frame_count,
    mel_filterbank,
    mel_spectrogram,
    random_crop,
    read_feature_file,
    read_wav,
    synth_corpus,
    wrap_pad,
    write_feature_file,
    write_wav,
)
from schemas.configs import CropConfig, MelConfig
from utils.exceptions import MissingInputError, ShapeError, WavParseError
from vectorspace import cosine_score
from vectorspace.io import read_manifest


def wav_bytes(pcm: list[int], channels: int = 1, rate: int = 16000, audio_format: int = 1):
    """Минимальный RIFF/WAVE: fmt (16 байт) + data."""
    data = struct.pack(f"<{len(pcm)}h", *pcm)
    block = 2 * channels
    fmt = struct.pack("<HHIIHH", audio_format, channels, rate, rate * block, block, 16)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt
    body += b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


# =============================================================================
# WAV
# =============================================================================


class TestWav:
    def test_one_second_of_silence(self, tmp_path):
        path = write_wav(tmp_path / "a.wav", WavAudio(16000, np.zeros(16000)))
        audio = read_wav(path)
        assert audio.sample_rate == 16000
        assert len(audio.samples) == 16000
        assert not np.any(audio.samples)

    def test_full_scale_sample(self, tmp_path):
        path = tmp_path / "max.wav"
        path.write_bytes(wav_bytes([32767, -32768]))
        samples = read_wav(path).samples
        assert math.isclose(samples[0], 32767 / 32768)
        assert samples[1] == -1.0

    def test_stereo_is_averaged(self, tmp_path):
        path = tmp_path / "stereo.wav"
        path.write_bytes(wav_bytes([100, 300, -50, 50], channels=2))
        np.testing.assert_allclose(read_wav(path).samples, [200 / 32768, 0.0])

    def test_non_pcm_reports_fmt_offset(self, tmp_path):
        path = tmp_path / "float.wav"
        path.write_bytes(wav_bytes([0, 0], audio_format=3))
        with pytest.raises(WavParseError) as info:
            read_wav(path)
        assert info.value.offset == 20

    def test_truncated_data_chunk(self, tmp_path):
        path = tmp_path / "cut.wav"
        path.write_bytes(wav_bytes([1, 2, 3, 4])[:-3])
        with pytest.raises(WavParseError) as info:
            read_wav(path)
        assert info.value.offset == 36

    def test_not_riff(self, tmp_path):
        path = tmp_path / "junk.wav"
        path.write_bytes(b"JUNK" + b"\x00" * 40)
        with pytest.raises(WavParseError) as info:
            read_wav(path)
        assert info.value.offset == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingInputError):
            read_wav(tmp_path / "nope.wav")


# =============================================================================
# Лог-мел
# =============================================================================


class TestMel:
    def test_frame_count_for_crop_length(self):
        config = MelConfig()
        samples = 349 * 160 + 400
        assert frame_count(samples, config) == 350
        spec = mel_spectrogram(WavAudio(16000, np.zeros(samples)), config)
        assert spec.data.shape == (80, 350)

    def test_silence_hits_floor(self):
        spec = mel_spectrogram(WavAudio(16000, np.zeros(1600)), MelConfig())
        np.testing.assert_allclose(spec.data, math.log(1e-10))

    def test_tone_peaks_in_its_bin(self):
        config = MelConfig()
        t = np.arange(16000) / 16000
        spec = mel_spectrogram(WavAudio(16000, 0.5 * np.sin(2 * np.pi * 1000.0 * t)), config)
        peaks = spec.data.argmax(axis=0)
        # 1 кГц попадает ровно в бин 32 БПФ на 512 точек
        expected = int(mel_filterbank(config)[:, 32].argmax())
        assert np.all(peaks == expected)

    def test_filterbank_rows_and_peaks(self):
        bank = mel_filterbank(MelConfig())
        assert bank.shape == (80, 257)
        assert np.all(bank.sum(axis=1) > 0)
        assert np.all(np.diff(bank.argmax(axis=1)) >= 0)

    def test_shorter_than_window(self):
        with pytest.raises(ShapeError):
            mel_spectrogram(WavAudio(16000, np.zeros(399)), MelConfig())

    def test_sample_rate_mismatch(self):
        with pytest.raises(ValueError):
            mel_spectrogram(WavAudio(8000, np.zeros(8000)), MelConfig())

    def test_mean_normalize(self, rng):
        config = MelConfig(mean_normalize=True)
        spec = mel_spectrogram(WavAudio(16000, rng.standard_normal(4000)), config)
        np.testing.assert_allclose(spec.data.mean(axis=1), 0.0, atol=1e-9)


# =============================================================================
# Окна
# =============================================================================


class TestCrop:
    def test_exact_length_is_identity(self, rng):
        matrix = rng.standard_normal((80, 350))
        crop, offset = random_crop(matrix, CropConfig(), return_offset=True)
        assert offset == 0
        np.testing.assert_array_equal(crop, matrix)

    def test_long_utterance_bounds(self, rng):
        matrix = rng.standard_normal((80, 700))
        for seed in range(20):
            crop, offset = random_crop(matrix, CropConfig(seed=seed), return_offset=True)
            assert 0 <= offset <= 350
            assert crop.shape == (80, 350)
            np.testing.assert_array_equal(crop, matrix[:, offset : offset + 350])

    def test_short_utterance_is_tiled(self, rng):
        matrix = rng.standard_normal((80, 100))
        assert wrap_pad(matrix, 350).shape == (80, 400)
        crop, offset = random_crop(matrix, CropConfig(), return_offset=True)
        assert crop.shape == (80, 350)
        np.testing.assert_array_equal(crop, np.tile(matrix, (1, 4))[:, offset : offset + 350])

    def test_seeded(self, rng):
        matrix = rng.standard_normal((8, 500))
        first = random_crop(matrix, CropConfig(window_length=50, seed=5))
        second = random_crop(matrix, CropConfig(window_length=50, seed=5))
        np.testing.assert_array_equal(first, second)


# =============================================================================
# Кэш признаков
# =============================================================================


class TestFeatureCache:
    def test_header_and_values(self, tmp_path, rng):
        matrix = rng.standard_normal((16, 9))
        path = write_feature_file(tmp_path / "u.mspc", matrix)
        raw = path.read_bytes()
        assert raw[:4] == b"MSPC"
        assert struct.unpack_from("<II", raw, 4) == (16, 9)
        assert len(raw) == 12 + 4 * 16 * 9
        np.testing.assert_allclose(read_feature_file(path), matrix, rtol=1e-6)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.mspc"
        path.write_bytes(b"XXXX" + struct.pack("<II", 1, 1) + b"\x00" * 4)
        with pytest.raises(ShapeError):
            read_feature_file(path)

    def test_wrong_payload_size(self, tmp_path):
        path = write_feature_file(tmp_path / "u.mspc", np.zeros((2, 3)))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ShapeError):
            read_feature_file(path)

    def test_store_lookup(self, tmp_path):
        store = FeatureStore(tmp_path)
        store.put("b", np.ones((2, 2)))
        store.put("a", np.zeros((2, 3)))
        assert store.ids() == ["a", "b"]
        assert "a" in store and "c" not in store
        assert store.get("a").shape == (2, 3)
        with pytest.raises(MissingInputError):
            store.get("c")


# =============================================================================
# Синтетический корпус
# =============================================================================


class TestSynthCorpus:
    def test_counts_and_files(self, tmp_path):
        corpus = synth_corpus(3, 2, seed=1, out_dir=tmp_path, duration=0.1)
        assert len(corpus.manifest) == 6
        assert len(corpus.vectors) == 6
        assert len(list((tmp_path / "wav").glob("*.wav"))) == 6
        manifest = read_manifest(tmp_path / "manifest.jsonl")
        assert [e.speaker for e in manifest] == ["spk000"] * 2 + ["spk001"] * 2 + ["spk002"] * 2
        assert len(read_wav(tmp_path / manifest[0].path).samples) == 1600

    def test_same_seed_same_bytes(self, tmp_path):
        synth_corpus(2, 2, seed=4, out_dir=tmp_path / "a", duration=0.05)
        synth_corpus(2, 2, seed=4, out_dir=tmp_path / "b", duration=0.05)
        for name in ("wav/spk001-utt001.wav", "manifest.jsonl", "ivectors.jsonl"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_same_speaker_vectors_are_closer(self, separable_vectors):
        vectors, speaker_of = separable_vectors
        same, different = [], []
        for i, a in enumerate(vectors.ids[:40]):
            for b in vectors.ids[i + 1 : 40]:
                score = cosine_score(vectors.get(a), vectors.get(b))
                (same if speaker_of[a] == speaker_of[b] else different).append(score)
        assert np.mean(same) > 0.7
        assert np.mean(same) > np.mean(different)

    def test_needs_two_speakers(self):
        with pytest.raises(ValueError):
            synth_corpus(1, 5, seed=0)

    def test_featurize_manifest(self, tmp_path):
        corpus = synth_corpus(2, 2, seed=0, out_dir=tmp_path / "corpus", duration=0.5)
        store = featurize_manifest(
            corpus.manifest, tmp_path / "corpus", tmp_path / "features", MelConfig(n_mels=16)
        )
        assert store.ids() == sorted(e.id for e in corpus.manifest)
        assert store.get("spk000-utt000").shape == (16, 48)
