"""
Плотный тензор с обратным распространением градиента (reverse-mode).

Каждая операция из nncore.functional создаёт новый Tensor и запоминает
родителей и замыкание backward. Tensor.backward() обходит граф в
топологическом порядке и накапливает градиенты в .grad.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

BackwardFn = Callable[[np.ndarray], None]


class Tensor:
    """
    Значение (float64, row-major) с опциональным градиентом.

    :param data: Массив или число, приводится к float64
    :param parents: Тензоры, из которых получен этот
    :param backward_fn: Замыкание, раздающее градиент родителям
    :param requires_grad: Нужно ли считать градиент по этому тензору
    """

    def __init__(
        self,
        data,
        parents: Sequence["Tensor"] = (),
        backward_fn: BackwardFn | None = None,
        requires_grad: bool = False,
        name: str | None = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.name = name
        self._parents = tuple(parents)
        self._backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def accumulate(self, grad: np.ndarray) -> None:
        """Добавляет градиент (с учётом broadcasting уже приведён к shape)."""
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + grad

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def _topological_order(self) -> list["Tensor"]:
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad: np.ndarray | None = None) -> None:
        """
        Запускает обратный проход от этого тензора.

        :param grad: Внешний градиент; по умолчанию единицы (скалярный лосс)
        """
        if grad is None:
            grad = np.ones_like(self.data)
        self.accumulate(np.asarray(grad, dtype=np.float64))
        for node in reversed(self._topological_order()):
            if node._backward_fn is not None and node.grad is not None:
                node._backward_fn(node.grad)

    # Арифметика делегируется в functional, чтобы backward жил в одном месте
    def __add__(self, other):
        from nncore.functional import add

        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from nncore.functional import sub

        return sub(self, other)

    def __rsub__(self, other):
        from nncore.functional import sub

        return sub(as_tensor(other), self)

    def __mul__(self, other):
        from nncore.functional import mul

        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from nncore.functional import mul

        return mul(self, -1.0)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


class Param(Tensor):
    """
    Обучаемый параметр: value + grad той же формы + слоты оптимизатора.

    grad всегда существует (нули после zero_grad), state хранит моменты
    Adam / momentum SGD по имени слота.
    """

    def __init__(self, data, name: str | None = None):
        super().__init__(data, requires_grad=True, name=name)
        self.grad = np.zeros_like(self.data)
        self.state: dict[str, np.ndarray] = {}

    @property
    def value(self) -> np.ndarray:
        return self.data

    def accumulate(self, grad: np.ndarray) -> None:
        self.grad = self.grad + grad

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)


def as_tensor(value) -> Tensor:
    """Оборачивает число / массив в константный Tensor."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def zero_grads(params: Iterable[Param]) -> None:
    for param in params:
        param.zero_grad()
