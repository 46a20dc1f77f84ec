"""
Полносвязный автоэнкодер 400-300-200-300-400 (System-1).
"""

from pathlib import Path

import numpy as np

from nncore import Linear, Module, Tensor, load_checkpoint, save_checkpoint
from nncore import functional as F
from utils.exceptions import ShapeError
from utils.io import write_json


class AEModel(Module):
    """
    Симметричный автоэнкодер: ReLU на скрытых слоях, линейный выход.

    :param dims: Размеры слоёв, например [400, 300, 200, 300, 400]
    :param rng: Генератор для инициализации Kaiming-uniform
    """

    def __init__(self, dims: list[int], rng: np.random.Generator):
        if dims != dims[::-1]:
            raise ShapeError(f"AEModel: слои должны быть симметричны: {dims}")
        self.dims = list(dims)
        self.layers = [Linear(d_in, d_out, rng) for d_in, d_out in zip(dims, dims[1:])]

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    def forward(self, x: Tensor) -> Tensor:
        h = x
        last = len(self.layers) - 1
        for index, layer in enumerate(self.layers):
            h = layer(h)
            if index < last:
                h = F.relu(h)
        return h


def save_ae(model: AEModel, path, train_config: dict | None = None) -> Path:
    meta = {"architecture": "autoencoder", "dims": model.dims}
    path = save_checkpoint(path, model.state_dict(), meta)
    write_json(path.with_name(path.name + ".arch.json"), {**meta, "train": train_config or {}})
    return path


def load_ae(path) -> AEModel:
    state, meta = load_checkpoint(path)
    if meta.get("architecture") != "autoencoder":
        raise ShapeError(f"{path}: это не чекпоинт автоэнкодера")
    model = AEModel(meta["dims"], np.random.default_rng(0))
    model.load_state_dict(state)
    return model
