# utils/registry_operations.py
"""
CRUD операции реестра запусков через SQLAlchemy.

Принципы те же, что и во всём слое хранения:
- модифицирующие операции оборачиваются декоратором @with_transaction
  (commit при успехе, rollback + лог с трейсбеком при ошибке);
- связь запуск → артефакты объявлена с lazy="raise_on_sql", поэтому
  все чтения явно подгружают её через selectinload();
- наружу отдаются pydantic-схемы (Run, Artifact), а не ORM-объекты.

Логирование: ✅ успех, ❌ ошибка, ⚠️ предупреждение, 🔍 поиск.
"""

import logging
from functools import wraps
from typing import Callable, TypeVar

from sqlalchemy import create_engine, event, select
from sqlalchemy.orm import Session, selectinload, sessionmaker

from config import settings
from models.models import ArtifactRecord, RunRecord
from schemas.records import RunReport
from schemas.schemas import Run

# Создаём именованный логгер для этого модуля
logger = logging.getLogger(__name__)

T = TypeVar("T")


def with_transaction(func: Callable[..., T]) -> Callable[..., T]:
    """
    Декоратор для автоматической обработки транзакций SQLAlchemy.

    Первый аргумент обёрнутой функции - фабрика сессий; декоратор открывает
    сессию, передаёт её функции, делает commit при успехе и rollback
    при любом исключении (с логом и повторным raise).

    :param func: Функция вида func(session, *args, **kwargs)
    :return: Функция вида wrapper(session_local, *args, **kwargs)
    """

    @wraps(func)
    def wrapper(session_local: sessionmaker, *args, **kwargs) -> T:
        with session_local() as session:
            try:
                result = func(session, *args, **kwargs)
                session.commit()
                return result
            except Exception as e:
                session.rollback()
                logger.error(f"❌ Ошибка в {func.__name__}: {e}", exc_info=True)
                raise

    return wrapper


def get_engine(db_name=None):
    """Создает и возвращает движок SQLite реестра."""
    db = db_name or settings.registry_db
    engine = create_engine(f"sqlite:///{db}", echo=settings.db_echo)

    # SQLite по умолчанию не проверяет внешние ключи (и не каскадирует удаление)
    @event.listens_for(engine, "connect")
    def _enable_foreign_keys(dbapi_connection, _):
        cursor = dbapi_connection.cursor()
        cursor.execute("PRAGMA foreign_keys=ON")
        cursor.close()

    logger.info(f"Создан движок реестра для {db}")
    return engine


def get_session_factory(engine):
    """
    Фабрика сессий: без autoflush, объекты не истекают после commit,
    чтобы схемы можно было собрать из них после выхода из транзакции.
    """
    return sessionmaker(
        bind=engine, autocommit=False, autoflush=False, expire_on_commit=False
    )


def _with_artifacts():
    return select(RunRecord).options(selectinload(RunRecord.artifacts))


@with_transaction
def run_record_create(session: Session, report: RunReport) -> Run:
    """
    Сохраняет отчёт о запуске стадии вместе с артефактами.

    :param session: Сессия SQLAlchemy (передаётся декоратором).
    :param report: Отчёт стадии (входы/выходы - путь -> sha256)
    :return: Run с присвоенным id
    """
    run = RunRecord(
        stage=report.stage,
        seed=report.seed,
        config_digest=report.config_digest,
        status=report.status,
        wall_time=report.wall_time,
        counters=report.counters,
    )
    run.artifacts = [
        ArtifactRecord(role=role, path=path, digest=digest)
        for role, files in (("input", report.inputs), ("output", report.outputs))
        for path, digest in sorted(files.items())
    ]
    session.add(run)
    session.flush()
    session.refresh(run, attribute_names=["created_at"])

    result = Run.model_validate(run)
    logger.info(
        f"✅ Запуск записан в реестр: ID={result.id}, стадия={result.stage}, "
        f"артефактов {len(result.artifacts)}"
    )
    return result


def run_get_all(session_local: sessionmaker, stage: str | None = None) -> list[Run]:
    """Все запуски (или только одной стадии) в порядке записи."""
    with session_local() as session:
        stmt = _with_artifacts().order_by(RunRecord.id)
        if stage is not None:
            stmt = stmt.where(RunRecord.stage == stage)
        runs = session.scalars(stmt).all()
        result = [Run.model_validate(run) for run in runs]
        logger.info(f"✅ Получено {len(result)} запусков из реестра.")
        return result


def run_get_by_stage(session_local: sessionmaker, stage: str) -> list[Run]:
    return run_get_all(session_local, stage=stage)


def run_find_by_output_digest(session_local: sessionmaker, digest: str) -> list[Run]:
    """
    Запуски, создавшие артефакт с данным sha256.

    :param digest: sha256 файла
    """
    with session_local() as session:
        stmt = (
            _with_artifacts()
            .join(RunRecord.artifacts)
            .where(ArtifactRecord.role == "output", ArtifactRecord.digest == digest)
            .order_by(RunRecord.id)
            .distinct()
        )
        runs = session.scalars(stmt).all()
        result = [Run.model_validate(run) for run in runs]
        logger.info(f"🔍 Найдено {len(result)} запусков с выходом {digest[:12]}…")
        return result


@with_transaction
def run_delete(session: Session, run_id: int) -> int:
    """
    Удаляет запуск; его артефакты удаляются каскадно.

    :return: ID удалённого запуска или -1, если его нет
    """
    run = session.execute(
        _with_artifacts().where(RunRecord.id == run_id)
    ).scalar_one_or_none()

    if not run:
        logger.warning(f"❌ Запуск с ID={run_id} не найден для удаления.")
        return -1

    artifacts_count = len(run.artifacts)
    session.delete(run)
    logger.info(f"✅ Запуск ID={run_id} удалён вместе с {artifacts_count} артефактами")
    return run_id
