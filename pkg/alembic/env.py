"""
Миграции реестра запусков.

Адрес БД берётся из Settings.registry_db (переменная REGISTRY_DB или .env),
значение sqlalchemy.url в alembic.ini используется только как запасное.
"""

from logging.config import fileConfig

from alembic import context
from sqlalchemy import engine_from_config, pool

from config import settings
from models.base import Base
from models.models import ArtifactRecord, RunRecord  # noqa: F401  таблицы реестра в метаданных

config = context.config

if config.config_file_name is not None:
    fileConfig(config.config_file_name)

if settings.registry_db:
    config.set_main_option("sqlalchemy.url", f"sqlite:///{settings.registry_db}")

target_metadata = Base.metadata


def run_migrations_offline() -> None:
    """SQL-скрипт миграции без подключения к БД."""
    context.configure(
        url=config.get_main_option("sqlalchemy.url"),
        target_metadata=target_metadata,
        literal_binds=True,
        dialect_opts={"paramstyle": "named"},
        render_as_batch=True,
    )
    with context.begin_transaction():
        context.run_migrations()


def run_migrations_online() -> None:
    connectable = engine_from_config(
        config.get_section(config.config_ini_section, {}),
        prefix="sqlalchemy.",
        poolclass=pool.NullPool,
    )
    with connectable.connect() as connection:
        # SQLite не умеет ALTER COLUMN: изменения таблиц через batch-режим
        context.configure(
            connection=connection, target_metadata=target_metadata, render_as_batch=True
        )
        with context.begin_transaction():
            context.run_migrations()


if context.is_offline_mode():
    run_migrations_offline()
else:
    run_migrations_online()
