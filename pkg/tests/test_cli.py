"""
Тесты конфигурации, реестра запусков и подкоманд CLI.
"""

import json

import pytest
from pydantic import ValidationError
from sqlalchemy import select

from cli import build_parser, main, pipeline_plan
from cli.parser import collect_overrides
from config import PipelineConfig, apply_overrides, config_digest
from evaluation import compute_eer, read_scores, read_trials
from models.models import ArtifactRecord
from schemas.records import RunReport
from utils.db_initial import create_tables, drop_tables
from utils.io import read_json, sidecar_path
from utils.registry_operations import (
    get_session_factory,
    run_delete,
    run_find_by_output_digest,
    run_get_all,
    run_get_by_stage,
    run_record_create,
)
from vectorspace.io import read_pairs


def run_cli(config_path, registry, *argv) -> int:
    return main(["--config", str(config_path), "--registry", str(registry), *argv])


def load(config_path) -> PipelineConfig:
    return PipelineConfig.load(config_path)


# =============================================================================
# Конфигурация
# =============================================================================


class TestConfig:
    def test_file_values(self, small_config):
        config = load(small_config)
        assert config.mining.k == 3
        assert config.corpus.num_speakers == 6
        assert config.siamese.profile == "tiny"

    def test_env_beats_file_and_flags_beat_env(self, small_config, monkeypatch):
        monkeypatch.setenv("SSV_SEED", "7")
        config = load(small_config)
        assert config.seed == 7
        assert config.ae.seed == 7 and config.siamese.seed == 7
        overridden = PipelineConfig.load(small_config, {"seed": 3, "mining.k": 5})
        assert overridden.seed == 3
        assert overridden.siamese.seed == 3
        assert overridden.mining.k == 5

    def test_nested_env_variable(self, monkeypatch):
        monkeypatch.setenv("SSV_MINING__K", "4")
        assert PipelineConfig.load().mining.k == 4

    def test_none_overrides_are_skipped(self, small_config):
        config = load(small_config)
        assert apply_overrides(config, {"mining.k": None}) is config

    def test_invalid_override(self, small_config):
        with pytest.raises(ValidationError):
            PipelineConfig.load(small_config, {"mining.k": 0})

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"minning": {"k": 3}}), encoding="utf-8")
        with pytest.raises(ValidationError):
            PipelineConfig.load(path)

    def test_digest_ignores_paths_only(self, small_config):
        config = load(small_config)
        moved = apply_overrides(config, {"paths.work_dir": "/elsewhere", "threads": 2})
        reseeded = apply_overrides(config, {"seed": 11})
        assert config_digest(moved) == config_digest(config)
        assert config_digest(reseeded) != config_digest(config)

    def test_flags_become_overrides(self, small_config):
        args = build_parser().parse_args(
            ["--config", str(small_config), "mine", "--k", "4", "--client-threshold", "0.6"]
        )
        assert collect_overrides(args) == {"mining.k": 4, "mining.client_threshold": 0.6}


# =============================================================================
# Реестр запусков
# =============================================================================


def report(stage: str, output_digest: str) -> RunReport:
    return RunReport(
        stage=stage,
        seed=0,
        config_digest="c" * 64,
        wall_time=1.5,
        inputs={"work/in.txt": "a" * 64},
        outputs={"work/out.txt": output_digest},
        counters={"pairs": 12},
    )


class TestRegistry:
    def test_create_and_read(self, session_factory):
        created = run_record_create(session_factory, report("mine", "d" * 64))
        assert created.id > 0
        assert created.created_at is not None
        assert {a.role for a in created.artifacts} == {"input", "output"}

        runs = run_get_all(session_factory)
        assert [r.id for r in runs] == [created.id]
        assert runs[0].counters == {"pairs": 12}

    def test_filter_by_stage_and_digest(self, session_factory):
        run_record_create(session_factory, report("mine", "d" * 64))
        ae = run_record_create(session_factory, report("train-ae", "e" * 64))
        assert [r.stage for r in run_get_by_stage(session_factory, "train-ae")] == ["train-ae"]
        found = run_find_by_output_digest(session_factory, "e" * 64)
        assert [r.id for r in found] == [ae.id]
        assert run_find_by_output_digest(session_factory, "a" * 64) == []

    def test_delete_cascades(self, session_factory):
        created = run_record_create(session_factory, report("mine", "d" * 64))
        assert run_delete(session_factory, created.id) == created.id
        assert run_get_all(session_factory) == []
        with session_factory() as session:
            assert session.scalars(select(ArtifactRecord)).all() == []

    def test_delete_missing(self, session_factory):
        assert run_delete(session_factory, 999) == -1

    def test_drop_and_recreate_clears_history(self, tmp_path):
        db = str(tmp_path / "history.db")
        engine = create_tables(db)
        run_record_create(get_session_factory(engine), report("mine", "d" * 64))
        engine.dispose()

        drop_tables(db)
        engine = create_tables(db)
        try:
            assert run_get_all(get_session_factory(engine)) == []
        finally:
            engine.dispose()


# =============================================================================
# Подкоманды
# =============================================================================


class TestStages:
    @pytest.fixture
    def registry(self, tmp_path):
        return tmp_path / "registry.db"

    @pytest.fixture
    def work(self, small_config):
        return load(small_config).paths

    def test_missing_input_exit_code(self, small_config, registry):
        assert run_cli(small_config, registry, "mine") == 2

    def test_validation_exit_code(self, small_config, registry):
        assert run_cli(small_config, registry, "mine", "--k", "0") == 3

    def test_mine_writes_artifacts_and_sidecars(self, small_config, registry, work):
        assert run_cli(small_config, registry, "synth-corpus") == 0
        assert run_cli(small_config, registry, "mine") == 0

        pairs = read_pairs(work.mining_dir / "pairs.txt")
        assert pairs
        mining = read_json(work.mining_dir / "mining_report.json")
        assert mining["pairs"] == len(pairs)
        sidecar = read_json(sidecar_path(work.mining_dir / "pairs.txt"))
        assert sidecar["stage"] == "mine"
        assert sidecar["seed"] == 0
        assert sidecar["config_digest"] == config_digest(load(small_config))

    def test_rerun_reproduces_outputs(self, small_config, registry, work):
        assert run_cli(small_config, registry, "synth-corpus") == 0
        assert run_cli(small_config, registry, "mine") == 0
        first = read_json(work.mining_dir / "mine.report.json")["outputs"]
        assert run_cli(small_config, registry, "mine") == 0
        second = read_json(work.mining_dir / "mine.report.json")["outputs"]
        assert first == second

    def test_runs_are_recorded(self, small_config, registry, capsys):
        assert run_cli(small_config, registry, "synth-corpus") == 0
        assert run_cli(small_config, registry, "mine", "--k", "0") == 3
        assert run_cli(small_config, registry, "train-double") == 2

        engine = create_tables(str(registry))
        try:
            runs = run_get_all(get_session_factory(engine))
        finally:
            engine.dispose()
        assert [(r.stage, r.status) for r in runs] == [
            ("synth-corpus", "ok"),
            ("train-double", "failed"),
        ]
        assert main(["--registry", str(registry), "runs", "--stage", "synth-corpus"]) == 0
        assert "synth-corpus" in capsys.readouterr().out

    def test_no_registry_flag(self, small_config, tmp_path):
        assert main(["--config", str(small_config), "--no-registry", "synth-corpus"]) == 0
        assert not (tmp_path / "registry.db").exists()

    def test_score_and_evaluate(self, small_config, registry, work):
        for step in (["synth-corpus"], ["make-trials"]):
            assert run_cli(small_config, registry, *step) == 0
        test_trials = work.trials_dir / "test.txt"
        assert len(read_trials(test_trials)) == 12
        assert run_cli(
            small_config, registry, "score", "--system", "ivector", "--trials", str(test_trials)
        ) == 0
        scores = work.scores_dir / "ivector.test.txt"
        assert run_cli(
            small_config, registry, "evaluate", "--trials", str(test_trials),
            "--scores", str(scores),
        ) == 0

        metrics = read_json(work.scores_dir / "ivector.test.metrics.json")
        assert {"eer", "eer_threshold", "min_dcf", "dcf_threshold", "params"} <= set(metrics)
        expected, _ = compute_eer(read_scores(scores, "ivector", read_trials(test_trials)))
        assert metrics["eer"] == pytest.approx(expected)

    def test_val_and_test_trials_are_disjoint(self, small_config, registry, work):
        for step in (["synth-corpus"], ["make-trials"]):
            assert run_cli(small_config, registry, *step) == 0
        val = {(t.enroll_id, t.test_id) for t in read_trials(work.trials_dir / "val.txt")}
        test = {(t.enroll_id, t.test_id) for t in read_trials(work.trials_dir / "test.txt")}
        assert len(val) == len(test) == 12
        assert not val & test


# =============================================================================
# Пайплайн
# =============================================================================


class TestPipeline:
    def test_plan_structure(self, small_config):
        plan = pipeline_plan(load(small_config))
        assert plan[0] == ["synth-corpus"]
        assert [step[0] for step in plan].count("score") == 7
        assert [step[0] for step in plan].count("evaluate") == 5
        assert plan.index(["train-triple"]) < plan.index(["extract-embeddings"])

    def test_dry_run_writes_nothing(self, small_config, tmp_path, capsys):
        code = main(["--config", str(small_config), "--no-registry", "pipeline", "--dry-run"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == " 1. synth-corpus"
        assert len(lines) == len(pipeline_plan(load(small_config)))
        assert not (tmp_path / "work").exists()

    @pytest.mark.slow
    def test_end_to_end_summary(self, small_config, tmp_path):
        registry = tmp_path / "registry.db"
        assert run_cli(small_config, registry, "pipeline") == 0
        summary = read_json(load(small_config).paths.reports_dir / "summary.json")
        assert [row["system"] for row in summary["rows"]] == [
            "system1",
            "system2",
            "system3",
            "fusion",
        ]
        assert summary["baseline"]["system"] == "ivector"
        assert set(summary["weights"]) == {"alpha", "beta"}
        for row in summary["rows"]:
            assert 0.0 <= row["eer"] <= 1.0
