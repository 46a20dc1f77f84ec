"""
Модуль настройки логирования для всего приложения.
Импортировать этот модуль в main.py для инициализации.
"""

import logging
from pathlib import Path

_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(
    level=logging.INFO,
    log_file="./logs/app.log",
    sqlalchemy_log_file="./logs/sqlalchemy.log",
):
    """
    Настраивает корневой логгер для всего приложения.

    :param level: Уровень логирования (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :param log_file: Путь к файлу логов приложения (None - только консоль)
    :param sqlalchemy_log_file: Путь к файлу логов реестра запусков (SQLAlchemy)
    """
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.insert(0, logging.FileHandler(log_file, encoding="utf-8"))

    logging.basicConfig(level=level, format=_FORMAT, handlers=handlers, force=True)

    # SQL реестра запусков пишем отдельно, чтобы не засорять app.log
    sqlalchemy_logger = logging.getLogger("sqlalchemy.engine")
    sqlalchemy_logger.setLevel(logging.WARNING)
    sqlalchemy_logger.propagate = False
    sqlalchemy_logger.handlers.clear()

    if sqlalchemy_log_file:
        Path(sqlalchemy_log_file).parent.mkdir(parents=True, exist_ok=True)
        sqlalchemy_handler = logging.FileHandler(sqlalchemy_log_file, encoding="utf-8")
        sqlalchemy_handler.setFormatter(
            logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")
        )
        sqlalchemy_logger.addHandler(sqlalchemy_handler)

    logging.info("Логирование настроено")
    if sqlalchemy_log_file:
        logging.debug(f"SQL логи сохраняются в: {sqlalchemy_log_file}")


def setup_debug_logging(log_file="./logs/debug.log"):
    """Подробное логирование для разработки (флаг --verbose)."""
    setup_logging(
        level=logging.DEBUG,
        log_file=log_file,
        sqlalchemy_log_file="./logs/sqlalchemy_debug.log",
    )

    # SQLAlchemy с максимальной детализацией
    logging.getLogger("sqlalchemy.engine").setLevel(logging.INFO)

    logging.info("Debug логирование настроено")
