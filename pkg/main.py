"""
Главная точка входа приложения.

    python main.py --config configs/desk.json pipeline
    python main.py mine --k 10 --client-threshold 0.5
"""

import sys

# ✅ ПЕРВЫМ ДЕЛОМ настраиваем логирование!
from config import settings
from utils.logger import setup_logging

# Настройка логирования (вызываем ОДИН РАЗ при старте)
setup_logging(
    level=settings.log_level,
    log_file=f"{settings.log_dir}/app.log",
    sqlalchemy_log_file=f"{settings.log_dir}/sqlalchemy.log",
)

# Теперь можем импортировать остальные модули
from cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
