"""
Запуск одной стадии: тайминг, sidecar-файлы выходов, отчёт о запуске
и запись в реестр запусков.
"""

import argparse
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from config import PipelineConfig, config_digest
from schemas.records import RunReport
from utils.db_initial import create_tables
from utils.io import file_digest, write_json, write_sidecar
from utils.registry_operations import get_session_factory, run_record_create

logger = logging.getLogger(__name__)


@dataclass
class StageResult:
    """
    Что стадия прочитала и записала.

    :param label: Уточнение имени отчёта (score.system1.test.report.json)
    """

    inputs: list[Path] = field(default_factory=list)
    outputs: list[Path] = field(default_factory=list)
    counters: dict[str, Any] = field(default_factory=dict)
    label: str | None = None


StageFn = Callable[[PipelineConfig, argparse.Namespace], StageResult]


@dataclass(frozen=True)
class StageSpec:
    name: str
    run: StageFn
    report_dir: Callable[[PipelineConfig], Path]
    help: str = ""


def _digests(paths: list[Path]) -> dict[str, str]:
    return {str(path): file_digest(path) for path in paths}


def record_run(report: RunReport, args: argparse.Namespace) -> None:
    """Пишет отчёт в реестр, если он не отключён флагом --no-registry."""
    if getattr(args, "no_registry", False):
        return
    engine = create_tables(getattr(args, "registry", None))
    try:
        run_record_create(get_session_factory(engine), report)
    finally:
        engine.dispose()


def run_stage(spec: StageSpec, config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    """
    Выполняет стадию и оформляет её результат.

    При ошибке пишет отчёт со статусом "failed" и пробрасывает исключение.
    """
    digest = config_digest(config)
    report_dir = spec.report_dir(config)
    logger.info("=" * 50)
    logger.info(f"Стадия {spec.name} (seed={config.seed}, config={digest[:12]})")
    logger.info("=" * 50)

    started = time.perf_counter()
    try:
        result = spec.run(config, args)
    except Exception as e:
        failed = RunReport(
            stage=spec.name,
            seed=config.seed,
            config_digest=digest,
            status="failed",
            wall_time=time.perf_counter() - started,
            counters={"error": f"{type(e).__name__}: {e}"},
        )
        write_json(report_dir / f"{spec.name}.report.json", failed)
        record_run(failed, args)
        logger.error(f"❌ Стадия {spec.name} завершилась ошибкой: {e}")
        raise

    for output in result.outputs:
        write_sidecar(output, spec.name, config.seed, digest)
    report = RunReport(
        stage=spec.name,
        seed=config.seed,
        config_digest=digest,
        wall_time=time.perf_counter() - started,
        inputs=_digests(result.inputs),
        outputs=_digests(result.outputs),
        counters=result.counters,
    )
    name = f"{spec.name}.{result.label}" if result.label else spec.name
    write_json(report_dir / f"{name}.report.json", report)
    record_run(report, args)
    logger.info(f"✅ Стадия {spec.name} завершена за {report.wall_time:.2f} с")
    return result
