"""
Сквозной прогон: корпус → признаки → отбор → три системы → оценки →
подбор весов на val → слияние и метрики на test.

Каждая стадия запускается так же, как из командной строки (повторный
разбор argv), поэтому пайплайн не связывает стадии в памяти.
"""

import argparse
import logging
from pathlib import Path

from cli.parser import build_parser, global_argv, load_config
from cli.runner import run_stage
from cli.stages import STAGES, SYSTEMS
from config import PipelineConfig
from utils.io import read_json, write_json

logger = logging.getLogger(__name__)

BASELINE = "ivector"


def pipeline_plan(config: PipelineConfig) -> list[list[str]]:
    """Список стадий с их аргументами, в порядке выполнения."""
    paths = config.paths
    val, test = (str(paths.trials_dir / f"{split}.txt") for split in ("val", "test"))
    plan = [
        ["synth-corpus"],
        ["featurize"],
        ["mine"],
        ["make-trials"],
        ["train-ae"],
        ["extract-ae"],
        ["train-double"],
        ["train-triple"],
        ["extract-embeddings"],
    ]
    for trials in (val, test):
        plan += [["score", "--system", system, "--trials", trials] for system in SYSTEMS]
    plan.append(["score", "--system", BASELINE, "--trials", test])
    plan.append(["tune-fusion", "--trials", val])
    plan.append(
        ["fuse", "--trials", test, "--weights", str(paths.reports_dir / "fusion_weights.json")]
    )
    for system in (*SYSTEMS, "fusion", BASELINE):
        scores = paths.scores_dir / f"{system}.test.txt"
        plan.append(["evaluate", "--trials", test, "--scores", str(scores), "--system", system])
    return plan


def _metrics(config: PipelineConfig, system: str) -> dict:
    return read_json(config.paths.scores_dir / f"{system}.test.metrics.json")


def write_summary(config: PipelineConfig) -> Path:
    """
    Итоговая таблица: строка на каждую систему и строка слияния,
    плюс базовая линия по исходным i-vector.
    """
    rows = [_metrics(config, system) for system in (*SYSTEMS, "fusion")]
    summary = {
        "rows": rows,
        "baseline": _metrics(config, BASELINE),
        "weights": read_json(config.paths.reports_dir / "fusion_weights.json"),
    }
    for row in rows:
        logger.info(
            f"{row['system']:<10} EER={row['eer'] * 100:6.2f}%  minDCF={row['min_dcf']:.4f}"
        )
    best_single = min(row["eer"] for row in rows[:-1])
    if rows[-1]["eer"] > best_single:
        logger.warning(
            f"⚠️ Слияние хуже лучшей системы: {rows[-1]['eer']:.4f} > {best_single:.4f}"
        )
    return write_json(config.paths.reports_dir / "summary.json", summary)


def run_pipeline_command(args: argparse.Namespace) -> int:
    config = load_config(args)
    plan = pipeline_plan(config)
    if args.dry_run:
        for number, step in enumerate(plan, start=1):
            print(f"{number:2d}. {' '.join(step)}")
        return 0

    parser = build_parser()
    prefix = global_argv(args)
    for number, step in enumerate(plan, start=1):
        logger.info(f"Шаг {number}/{len(plan)}: {' '.join(step)}")
        stage_args = parser.parse_args([*prefix, *step])
        run_stage(STAGES[stage_args.command], load_config(stage_args), stage_args)

    out = write_summary(config)
    logger.info(f"✅ Пайплайн завершён, итог в {out}")
    return 0
