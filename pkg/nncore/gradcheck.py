"""
Проверка аналитических градиентов центральными конечными разностями.
"""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from nncore import functional as F
from nncore.layers import Conv2d, Linear, MaxPool2d, SelfAttentionPooling
from nncore.tensor import Param, Tensor
from utils.exceptions import ShapeError

logger = logging.getLogger(__name__)

# Координаты с почти нулевым градиентом сравниваются по абсолютной ошибке
_REL_FLOOR = 1e-6


def grad_check(
    fragment: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    params: Sequence[Param] = (),
    epsilon: float = 1e-5,
    max_coords_per_tensor: int | None = None,
    seed: int = 0,
) -> float:
    """
    Сравнивает backward с (f(x+ε) − f(x−ε)) / 2ε по каждой координате.

    :param fragment: Детерминированная функция fragment(*inputs) -> скаляр
    :param inputs: Входные тензоры (градиент по ним тоже проверяется)
    :param params: Параметры фрагмента
    :param epsilon: Шаг конечной разности, от 1e-6 до 1e-4
    :param max_coords_per_tensor: Ограничить число проверяемых координат
        на тензор (случайная выборка) - для больших моделей
    :param seed: Зерно выборки координат
    :return: Максимальная относительная ошибка
    """
    if not 1e-6 <= epsilon <= 1e-4:
        raise ValueError(f"grad_check: epsilon={epsilon} вне диапазона [1e-6, 1e-4]")

    targets: list[Tensor] = list(inputs) + list(params)
    for tensor in targets:
        tensor.data = np.ascontiguousarray(tensor.data, dtype=np.float64)
        tensor.requires_grad = True
        tensor.zero_grad()

    output = fragment(*inputs)
    if output.data.size != 1:
        raise ShapeError(f"grad_check: фрагмент должен вернуть скаляр, а не {output.shape}")
    output.backward()
    analytic = [
        np.zeros_like(t.data) if t.grad is None else np.array(t.grad) for t in targets
    ]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for position, (tensor, grad) in enumerate(zip(targets, analytic)):
        flat = tensor.data.reshape(-1)
        grad_flat = grad.reshape(-1)
        if max_coords_per_tensor is not None and flat.size > max_coords_per_tensor:
            coords = np.sort(rng.choice(flat.size, max_coords_per_tensor, replace=False))
        else:
            coords = np.arange(flat.size)

        tensor_worst = 0.0
        for index in coords:
            original = flat[index]
            flat[index] = original + epsilon
            f_plus = float(fragment(*inputs).data)
            flat[index] = original - epsilon
            f_minus = float(fragment(*inputs).data)
            flat[index] = original
            numeric = (f_plus - f_minus) / (2.0 * epsilon)
            scale = max(abs(grad_flat[index]), abs(numeric), _REL_FLOOR)
            tensor_worst = max(tensor_worst, abs(grad_flat[index] - numeric) / scale)

        label = tensor.name or f"tensor{position}"
        logger.debug(
            f"🔍 grad_check {label} {tensor.shape}: {len(coords)} коорд., "
            f"max rel err {tensor_worst:.3e}"
        )
        worst = max(worst, tensor_worst)

    for tensor in targets:
        tensor.zero_grad()
    return worst


def _projected(rng: np.random.Generator, layer: Callable[..., Tensor], out_shape):
    """Скалярная свёртка выхода со случайной матрицей: все координаты влияют на f."""
    weights = rng.standard_normal(out_shape)
    return lambda *xs: F.total(F.mul(layer(*xs), weights))


def layer_suite(epsilon: float = 1e-6, seed: int = 0) -> dict[str, float]:
    """
    Проверка градиентов всех слоёв и функций потерь ядра на малых входах.

    :return: Имя фрагмента -> максимальная относительная ошибка
    """
    rng = np.random.default_rng(seed)

    def normal(*shape) -> Tensor:
        return Tensor(rng.standard_normal(shape))

    linear = Linear(6, 4, rng)
    conv = Conv2d(2, 3, rng)
    pool = MaxPool2d(2)
    sap = SelfAttentionPooling(5, 4, rng)
    labels = rng.integers(0, 2, size=4).astype(np.float64)
    target = rng.standard_normal((3, 5))

    cases: dict[str, tuple[Callable[..., Tensor], list[Tensor], list[Param]]] = {
        "linear": (_projected(rng, linear, (3, 4)), [normal(3, 6)], linear.parameters()),
        "conv2d": (_projected(rng, conv, (3, 5, 6)), [normal(2, 5, 6)], conv.parameters()),
        "conv2d_batch": (
            _projected(rng, conv, (2, 3, 4, 4)),
            [normal(2, 2, 4, 4)],
            conv.parameters(),
        ),
        "maxpool2d": (_projected(rng, pool, (2, 2, 3)), [normal(2, 4, 6)], []),
        "sap": (_projected(rng, sap, (5,)), [normal(5, 7)], sap.parameters()),
        "relu": (_projected(rng, F.relu, (4, 5)), [normal(4, 5)], []),
        "sigmoid": (_projected(rng, F.sigmoid, (4, 5)), [normal(4, 5)], []),
        "tanh": (_projected(rng, F.tanh, (4, 5)), [normal(4, 5)], []),
        "softmax": (_projected(rng, F.softmax, (4, 5)), [normal(4, 5)], []),
        "l2_normalize": (_projected(rng, F.l2_normalize, (4, 5)), [normal(4, 5)], []),
        "mse_loss": (lambda x: F.mse_loss(x, target), [normal(3, 5)], []),
        "bce_loss": (lambda x: F.bce_loss(F.sigmoid(x), labels), [normal(4)], []),
        "triplet_loss": (
            lambda a, c, i: F.triplet_loss(
                F.l2_normalize(a), F.l2_normalize(c), F.l2_normalize(i), margin=1.0
            ),
            [normal(3, 5), normal(3, 5), normal(3, 5)],
            [],
        ),
    }

    errors = {}
    for name, (fragment, inputs, params) in cases.items():
        errors[name] = grad_check(fragment, inputs, params, epsilon=epsilon, seed=seed)
        logger.info(f"🔍 grad_check {name}: {errors[name]:.3e}")
    return errors
