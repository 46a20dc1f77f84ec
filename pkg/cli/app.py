"""
Точка входа CLI и коды выхода.

    0 - успех
    1 - непредвиденная ошибка
    2 - нет входного артефакта (MissingInputError)
    3 - ошибка валидации (pydantic ValidationError или SSVError)
"""

import argparse
import logging
from typing import Sequence

from pydantic import ValidationError

from cli.parser import build_parser, load_config
from cli.runner import run_stage
from cli.stages import STAGES
from utils.db_initial import create_tables
from utils.exceptions import MissingInputError, SSVError
from utils.logger import setup_debug_logging
from utils.registry_operations import get_session_factory, run_get_all

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_MISSING_INPUT = 2
EXIT_INVALID = 3


def run_stage_command(args: argparse.Namespace) -> int:
    config = load_config(args)
    run_stage(STAGES[args.command], config, args)
    return EXIT_OK


def runs_command(args: argparse.Namespace) -> int:
    """Печатает историю запусков: id, стадия, статус, время, дайджест конфига."""
    engine = create_tables(args.registry)
    try:
        runs = run_get_all(get_session_factory(engine), stage=args.stage)
    finally:
        engine.dispose()
    for run in runs:
        created = f"{run.created_at:%Y-%m-%d %H:%M:%S}" if run.created_at else "-"
        print(
            f"{run.id:5d}  {run.stage:<20} {run.status:<7} {run.wall_time:9.2f}s  "
            f"seed={run.seed}  config={run.config_digest[:12]}  "
            f"outputs={len(run.outputs())}  {created}"
        )
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """
    Разбирает аргументы и выполняет команду.

    :param argv: Аргументы без имени программы (None - sys.argv)
    :return: Код выхода
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        setup_debug_logging()

    try:
        return args.handler(args)
    except MissingInputError as e:
        logger.error(f"❌ {e}")
        return EXIT_MISSING_INPUT
    except (ValidationError, SSVError) as e:
        logger.error(f"❌ Ошибка валидации: {e}")
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"❌ Непредвиденная ошибка: {e}", exc_info=True)
        return EXIT_FAILURE
