"""
Оптимизаторы SGD и Adam.

Шаг скорости обучения: lr_t = lr0 / (1 + lr_decay * t), где t - номер
мини-батча (decay_mode="lr"). В режиме decay_mode="weight" затухание
трактуется как L2-штраф, а lr остаётся постоянным.
"""

from __future__ import annotations

import logging
from typing import Iterable, Sequence

import numpy as np

from nncore.tensor import Param
from schemas.configs import OptimizerConfig
from utils.exceptions import NonFiniteError

logger = logging.getLogger(__name__)


def effective_learning_rate(config: OptimizerConfig, step_index: int) -> float:
    if config.decay_mode == "lr":
        return config.learning_rate / (1.0 + config.lr_decay * step_index)
    return config.learning_rate


def _named(params) -> list[tuple[str, Param]]:
    named = []
    for index, item in enumerate(params):
        if isinstance(item, tuple):
            named.append(item)
        else:
            named.append((item.name or f"param{index}", item))
    return named


def optimizer_step(
    params: Iterable[Param] | Sequence[tuple[str, Param]],
    config: OptimizerConfig,
    step_index: int,
) -> float:
    """
    Обновляет параметры по накопленным градиентам и обнуляет градиенты.

    :param params: Параметры (или пары имя-параметр для диагностики)
    :param config: Настройки оптимизатора
    :param step_index: Номер мини-батча с нуля
    :return: Использованный шаг обучения lr_t
    :raises NonFiniteError: Если хотя бы один градиент содержит NaN/Inf
    """
    named = _named(params)
    bad = [name for name, param in named if not np.all(np.isfinite(param.grad))]
    if bad:
        logger.error(f"❌ Нечисловой градиент на шаге {step_index}: {bad}")
        raise NonFiniteError(
            "Градиент содержит NaN/Inf", {"step": step_index, "params": bad}
        )

    lr = effective_learning_rate(config, step_index)
    for _, param in named:
        grad = param.grad
        if config.decay_mode == "weight" and config.lr_decay > 0:
            grad = grad + config.lr_decay * param.data

        if config.kind == "sgd":
            param.data = param.data - lr * grad
        else:
            m = param.state.get("m", np.zeros_like(param.data))
            v = param.state.get("v", np.zeros_like(param.data))
            m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * grad
            v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * grad**2
            t = step_index + 1
            m_hat = m / (1.0 - config.adam_beta1**t)
            v_hat = v / (1.0 - config.adam_beta2**t)
            param.data = param.data - lr * m_hat / (np.sqrt(v_hat) + config.adam_eps)
            param.state["m"], param.state["v"] = m, v

        param.zero_grad()
    return lr


class Optimizer:
    """Счётчик шагов поверх optimizer_step для циклов обучения."""

    def __init__(self, named_params: Sequence[tuple[str, Param]], config: OptimizerConfig):
        self.named_params = list(named_params)
        self.config = config
        self.step_index = 0

    def step(self) -> float:
        lr = optimizer_step(self.named_params, self.config, self.step_index)
        self.step_index += 1
        return lr

    def zero_grad(self) -> None:
        for _, param in self.named_params:
            param.zero_grad()
