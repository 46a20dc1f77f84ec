"""
Разбор командной строки.

Флаги стадий пишутся в dest вида "mining.k" и превращаются в точечные
переопределения конфигурации (флаги важнее окружения и JSON-файла).
"""

import argparse
from typing import Any

from config import PipelineConfig
from schemas.configs import FusionWeights, ImpostorRule
from utils.io import read_json

# (флаг, dest) общих параметров - пайплайн передаёт их каждой стадии
GLOBAL_FLAGS = (
    ("--config", "config"),
    ("--seed", "seed"),
    ("--threads", "threads"),
    ("--work-dir", "paths.work_dir"),
    ("--manifest", "paths.manifest"),
    ("--ivectors", "paths.ivectors"),
    ("--registry", "registry"),
)
_TOP_LEVEL = {"seed", "threads"}


def _enable(parser: argparse.ArgumentParser, flag: str, dest: str, help: str) -> None:
    """Флаг-включатель: без него значение берётся из конфигурации."""
    parser.add_argument(flag, dest=dest, action="store_const", const=True, help=help)


def _add_global(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON-файл конфигурации пайплайна")
    parser.add_argument("--seed", dest="seed", type=int, help="зерно (важнее SSV_SEED)")
    parser.add_argument("--threads", dest="threads", type=int, help="число потоков")
    parser.add_argument("--work-dir", dest="paths.work_dir", help="рабочий каталог")
    parser.add_argument("--manifest", dest="paths.manifest", help="манифест реального корпуса")
    parser.add_argument("--ivectors", dest="paths.ivectors", help="i-vector реального корпуса")
    parser.add_argument("--verbose", action="store_true", help="DEBUG-логирование")
    parser.add_argument("--registry", help="файл SQLite реестра запусков")
    parser.add_argument(
        "--no-registry", action="store_true", help="не записывать запуски в реестр"
    )


def _add_score_inputs(parser: argparse.ArgumentParser, default_trials: str) -> None:
    parser.add_argument(
        "--trials", help=f"список трайлов (по умолчанию trials/{default_trials}.txt)"
    )
    for index in (1, 2, 3):
        parser.add_argument(f"--s{index}", help=f"оценки System-{index}")
    _enable(parser, "--normalize", "eval.normalize", "min-max нормализация перед слиянием")


def _add_stage_flags(name: str, parser: argparse.ArgumentParser) -> None:
    if name == "synth-corpus":
        parser.add_argument("--num-speakers", dest="corpus.num_speakers", type=int)
        parser.add_argument("--utts-per-speaker", dest="corpus.utts_per_speaker", type=int)
        parser.add_argument("--duration", dest="corpus.duration", type=float)
        parser.add_argument("--snr-db", dest="corpus.snr_db", type=float)
        parser.add_argument("--heldout", dest="corpus.heldout_per_speaker", type=int)
    elif name == "featurize":
        parser.add_argument("--n-mels", dest="features.n_mels", type=int)
        _enable(parser, "--mean-normalize", "features.mean_normalize", "вычитать среднее")
    elif name == "mine":
        parser.add_argument("--k", dest="mining.k", type=int, help="соседей на якорь")
        parser.add_argument("--client-threshold", dest="mining.client_threshold", type=float)
        parser.add_argument(
            "--impostor-threshold", dest="mining.impostor_threshold", type=float
        )
        parser.add_argument(
            "--impostor-rule",
            dest="mining.impostor_rule",
            choices=[rule.value for rule in ImpostorRule],
        )
        _enable(parser, "--full-cross", "mining.full_cross_triplets", "все клиенты × импостеры")
        parser.add_argument(
            "--open-vectors", dest="paths.open_vectors", help="векторы подмножества B"
        )
    elif name == "train-ae":
        parser.add_argument("--epochs", dest="ae.epochs", type=int)
        parser.add_argument("--neighbor-k", dest="ae.neighbor_k", type=int)
        parser.add_argument("--lr", dest="ae.optimizer.learning_rate", type=float)
    elif name in ("train-double", "train-triple"):
        parser.add_argument("--epochs", dest="siamese.epochs", type=int)
        parser.add_argument("--profile", dest="siamese.profile", choices=["full", "tiny"])
        parser.add_argument("--lr", dest="siamese.optimizer.learning_rate", type=float)
        parser.add_argument("--crop-frames", dest="siamese.crop_frames", type=int)
        parser.add_argument("--max-pairs", dest="siamese.max_pairs_per_epoch", type=int)
        if name == "train-triple":
            parser.add_argument("--margin", dest="siamese.margin", type=float)
    elif name == "extract-embeddings":
        parser.add_argument("--model", choices=["triple", "double"], default="triple")
    elif name == "make-trials":
        parser.add_argument("--num-trials", dest="corpus.num_trials", type=int)
    elif name == "score":
        parser.add_argument(
            "--system", required=True, choices=["ivector", "system1", "system2", "system3"]
        )
        parser.add_argument("--trials", help="список трайлов (по умолчанию trials/test.txt)")
        parser.add_argument("--out", help="файл оценок")
    elif name == "evaluate":
        parser.add_argument("--trials", required=True)
        parser.add_argument("--scores", required=True)
        parser.add_argument("--system", help="имя системы в отчёте")
        parser.add_argument("--p-target", dest="eval.dcf.p_target", type=float)
        parser.add_argument("--c-miss", dest="eval.dcf.c_miss", type=float)
        parser.add_argument("--c-fa", dest="eval.dcf.c_fa", type=float)
    elif name == "fuse":
        _add_score_inputs(parser, "test")
        parser.add_argument("--alpha", dest="eval.fusion.alpha", type=float)
        parser.add_argument("--beta", dest="eval.fusion.beta", type=float)
        parser.add_argument("--weights", help="JSON с alpha/beta (fusion_weights.json)")
        parser.add_argument("--out", help="файл оценок слияния")
    elif name == "tune-fusion":
        _add_score_inputs(parser, "val")
        parser.add_argument("--grid-step", dest="eval.grid_step", type=float)
    elif name == "gradcheck":
        parser.add_argument("--eps", type=float, default=1e-6, help="шаг конечной разности")
        parser.add_argument(
            "--coords", type=int, default=20, help="координат на тензор для моделей"
        )


def build_parser() -> argparse.ArgumentParser:
    # Отложенный импорт: стадии тянут все доменные пакеты
    from cli.pipeline import run_pipeline_command
    from cli.app import run_stage_command, runs_command
    from cli.stages import STAGES

    parser = argparse.ArgumentParser(
        prog="ssv", description="Самообучаемая верификация дикторов: стадии пайплайна"
    )
    _add_global(parser)
    commands = parser.add_subparsers(dest="command", required=True)

    for name, spec in STAGES.items():
        sub = commands.add_parser(name, help=spec.help)
        _add_stage_flags(name, sub)
        sub.set_defaults(handler=run_stage_command)

    runs = commands.add_parser("runs", help="история запусков из реестра")
    runs.add_argument("--stage", help="только одна стадия")
    runs.set_defaults(handler=runs_command)

    pipeline = commands.add_parser("pipeline", help="все стадии подряд")
    pipeline.add_argument("--dry-run", action="store_true", help="только план стадий")
    pipeline.set_defaults(handler=run_pipeline_command)
    return parser


def collect_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Точечные переопределения из разобранных флагов (None - флаг не задан)."""
    overrides = {
        key: value
        for key, value in vars(args).items()
        if (key in _TOP_LEVEL or "." in key) and value is not None
    }
    weights_file = getattr(args, "weights", None)
    if weights_file:
        weights = FusionWeights.model_validate(read_json(weights_file))
        overrides.setdefault("eval.fusion.alpha", weights.alpha)
        overrides.setdefault("eval.fusion.beta", weights.beta)
    return overrides


def load_config(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig.load(args.config, collect_overrides(args))


def global_argv(args: argparse.Namespace) -> list[str]:
    """Общие флаги в виде argv - для повторного разбора по стадиям."""
    argv: list[str] = []
    for flag, dest in GLOBAL_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            argv += [flag, str(value)]
    if args.verbose:
        argv.append("--verbose")
    if args.no_registry:
        argv.append("--no-registry")
    return argv
