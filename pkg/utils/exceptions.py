"""
Иерархия исключений пайплайна.

Все ошибки наследуются от SSVError, а также от подходящего встроенного
исключения (ValueError, KeyError, ...), чтобы вызывающий код мог ловить
их привычным способом.
"""


class SSVError(Exception):
    """Базовая ошибка пайплайна"""


class ShapeError(SSVError, ValueError):
    """Несовместимые размерности тензоров"""


class EmptyInputError(ShapeError):
    """Пустой вход (например, T = 0 кадров для SAP)"""


class DegenerateInputError(SSVError, ValueError):
    """Вырожденный вход: нулевой вектор для нормализации или косинуса"""


class ContractViolation(SSVError, ValueError):
    """Нарушено предусловие операции (например, вход не единичной нормы)"""


class NonFiniteError(SSVError, ArithmeticError):
    """NaN/Inf в лоссе или градиенте.

    :param diagnostics: Словарь с контекстом (эпоха, батч, параметры)
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        super().__init__(f"{message} ({details})" if details else message)


class PoolTooSmallError(SSVError, ValueError):
    """Кандидатов меньше, чем требуется k"""

    def __init__(self, requested: int, available: int):
        self.requested = requested
        self.available = available
        super().__init__(
            f"Запрошено k={requested} соседей, доступно только {available}"
        )


class WavParseError(SSVError, ValueError):
    """Ошибка разбора RIFF/WAVE с указанием смещения в байтах"""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (смещение {offset} байт)")


class TrialResolutionError(SSVError, KeyError):
    """Идентификатор из списка трайлов не найден среди векторов"""

    def __init__(self, line: int, missing_id: str):
        self.line = line
        self.missing_id = missing_id
        super().__init__(f"Трайл в строке {line}: неизвестный id '{missing_id}'")

    def __str__(self) -> str:
        return self.args[0]


class ScoreAlignmentError(SSVError, ValueError):
    """Списки трайлов у систем не совпадают"""

    def __init__(self, index: int, message: str):
        self.index = index
        super().__init__(f"Расхождение трайлов на позиции {index}: {message}")


class SingleClassError(SSVError, ValueError):
    """В наборе оценок только один класс (нужны и target, и nontarget)"""


class MissingInputError(SSVError, FileNotFoundError):
    """Входной артефакт предыдущей стадии отсутствует"""

    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"Не найден входной файл: {self.path}")

    def __str__(self) -> str:
        return self.args[0]


class CheckpointFormatError(SSVError, ValueError):
    """Повреждённый или несовместимый контейнер чекпоинта"""
