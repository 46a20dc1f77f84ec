"""
Общие фикстуры: генераторы, малые профили, корпуса и реестр во временных каталогах.
"""

import json

import numpy as np
import pytest

from features import synth_vectors
from schemas.configs import EncoderProfile
from schemas.records import ScoreSet, Trial, TrialLabel
from utils.db_initial import create_tables
from utils.registry_operations import get_session_factory


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_profile():
    return EncoderProfile.preset("tiny")


@pytest.fixture(scope="session")
def separable_vectors():
    """20 дикторов × 10 высказываний, шум 0.3: (VectorSet, id -> диктор)."""
    return synth_vectors(20, 10, seed=0)


@pytest.fixture
def make_scoreset():
    """Фабрика размеченного ScoreSet из списков target/nontarget оценок."""

    def factory(targets, nontargets, name="system"):
        trials = [
            Trial(enroll_id=f"t{i}", test_id=f"t{i}b", label=TrialLabel.TARGET)
            for i in range(len(targets))
        ] + [
            Trial(enroll_id=f"n{i}", test_id=f"n{i}b", label=TrialLabel.NONTARGET)
            for i in range(len(nontargets))
        ]
        scores = [float(s) for s in [*targets, *nontargets]]
        return ScoreSet(system_name=name, trials=trials, scores=scores)

    return factory


@pytest.fixture
def session_factory(tmp_path):
    engine = create_tables(str(tmp_path / "registry.db"))
    yield get_session_factory(engine)
    engine.dispose()


@pytest.fixture
def small_config(tmp_path):
    """Конфигурация, на которой весь пайплайн проходит за секунды."""
    payload = {
        "seed": 0,
        "paths": {"work_dir": str(tmp_path / "work")},
        "corpus": {
            "num_speakers": 6,
            "utts_per_speaker": 6,
            "duration": 0.5,
            "heldout_per_speaker": 3,
            "num_trials": 12,
        },
        "features": {"n_mels": 16},
        "mining": {"k": 3},
        "ae": {"dims": [400, 50, 20, 50, 400], "epochs": 3, "neighbor_k": 2},
        "siamese": {
            "profile": "tiny",
            "epochs": 1,
            "crop_frames": 16,
            "max_pairs_per_epoch": 8,
            "optimizer": {"kind": "adam", "learning_rate": 0.001, "batch_size": 4},
        },
        "eval": {"grid_step": 0.25},
    }
    path = tmp_path / "small.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path
