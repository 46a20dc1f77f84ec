"""
Слои с параметрами поверх nncore.functional.

Module хранит Param-атрибуты и вложенные модули; имена параметров
строятся по пути атрибутов ("conv1_1.weight", "head.2.bias", ...)
и используются чекпоинтом.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from nncore import functional as F
from nncore.tensor import Param, Tensor
from utils.exceptions import ShapeError


def kaiming_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int):
    """Kaiming-uniform для ReLU: U(±sqrt(6 / fan_in))."""
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Module:
    """Базовый класс слоя / модели."""

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Param]]:
        for name, value in vars(self).items():
            path = f"{prefix}{name}"
            if isinstance(value, Param):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{path}.")
            elif isinstance(value, (list, tuple)):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{path}.{index}.")

    def parameters(self) -> list[Param]:
        return [param for _, param in self.named_parameters()]

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: param.data.copy() for name, param in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """Загружает значения параметров; имена и формы должны совпасть."""
        own = dict(self.named_parameters())
        missing = set(own) - set(state)
        unexpected = set(state) - set(own)
        if missing or unexpected:
            raise ShapeError(
                f"load_state_dict: нет {sorted(missing)}, лишние {sorted(unexpected)}"
            )
        for name, param in own.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != param.shape:
                raise ShapeError(
                    f"load_state_dict: {name} {value.shape} != {param.shape}"
                )
            param.data = value.copy()
            param.zero_grad()
            param.state.clear()

    def num_parameters(self) -> int:
        return sum(param.data.size for param in self.parameters())


class Linear(Module):
    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: np.random.Generator,
        zero_init: bool = False,
    ):
        shape = (out_features, in_features)
        weight = np.zeros(shape) if zero_init else kaiming_uniform(rng, shape, in_features)
        self.weight = Param(weight)
        self.bias = Param(np.zeros(out_features))

    def forward(self, x: Tensor) -> Tensor:
        return F.linear(x, self.weight, self.bias)


class Conv2d(Module):
    """Свёртка kernel×kernel, шаг 1, паддинг "same" для нечётного ядра."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rng: np.random.Generator,
        kernel: int = 3,
    ):
        shape = (out_channels, in_channels, kernel, kernel)
        self.weight = Param(kaiming_uniform(rng, shape, in_channels * kernel * kernel))
        self.bias = Param(np.zeros(out_channels))
        self.padding = kernel // 2

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight, self.bias, padding=self.padding)


class SelfAttentionPooling(Module):
    """
    Однопроходное аддитивное внимание по времени.

    W, v ~ U(±1/sqrt(D)), b = 0.
    """

    def __init__(self, dim: int, attention_dim: int, rng: np.random.Generator):
        bound = 1.0 / math.sqrt(dim)
        self.w = Param(rng.uniform(-bound, bound, size=(attention_dim, dim)))
        self.b = Param(np.zeros(attention_dim))
        self.v = Param(rng.uniform(-bound, bound, size=attention_dim))

    def forward(self, h: Tensor) -> Tensor:
        return F.sap_pool(h, self.w, self.b, self.v)

    def weights(self, h: Tensor) -> np.ndarray:
        return F.attention_weights(h, self.w, self.b, self.v)


class MaxPool2d(Module):
    """Макс-пулинг без параметров (окно и шаг равны size)."""

    def __init__(self, size: int = 2):
        self.size = size

    def forward(self, x: Tensor) -> Tensor:
        return F.maxpool2d(x, self.size)
