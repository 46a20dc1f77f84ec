# utils/db_initial.py
"""
Модуль инициализации базы данных реестра
"""
import logging

from models.base import Base
from utils.registry_operations import get_engine

# Создаём именованный логгер для этого модуля
logger = logging.getLogger(__name__)


def create_tables(db_name=None):
    """Создаёт все таблицы реестра (если их ещё нет)."""
    logger.info("Начало создания таблиц...")
    engine = get_engine(db_name)
    Base.metadata.create_all(bind=engine)
    logger.info("✅ Таблицы успешно созданы!")
    return engine


def drop_tables(db_name=None):
    """Удаляет все таблицы реестра. ОСТОРОЖНО: удалит историю запусков!"""
    logger.warning("⚠️ Запрос на удаление ВСЕХ таблиц!")
    engine = get_engine(db_name)
    Base.metadata.drop_all(bind=engine)
    logger.info("🗑️ Таблицы удалены!")
