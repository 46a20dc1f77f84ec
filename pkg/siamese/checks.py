"""
Проверка градиентов полных сиамских моделей на профиле tiny.
"""

import logging

import numpy as np

from nncore import Tensor, grad_check
from nncore import functional as F
from schemas.configs import EncoderProfile
from siamese.model import DoubleBranchModel, TripleBranchModel

logger = logging.getLogger(__name__)

# Кадров во входном окне: после трёх пулингов остаётся 2
CHECK_FRAMES = 16


def model_suite(
    epsilon: float = 1e-6, max_coords_per_tensor: int | None = 20, seed: int = 0
) -> dict[str, float]:
    """
    Двух- и трёхветочная сети целиком, включая входные окна.

    Голова инициализируется случайно (не нулями), иначе градиенты
    энкодера двухветочной сети тождественно равны нулю.

    :return: Имя модели -> максимальная относительная ошибка
    """
    profile = EncoderProfile.preset("tiny")
    rng = np.random.default_rng(seed)

    def window() -> Tensor:
        return Tensor(rng.standard_normal((profile.n_mels, CHECK_FRAMES)))

    double = DoubleBranchModel(profile, rng, zero_init_head=False)
    # большой margin держит hinge активным
    triple = TripleBranchModel(profile, rng, margin=2.0)

    errors = {
        "double_branch": grad_check(
            double,
            [window(), window()],
            double.parameters(),
            epsilon=epsilon,
            max_coords_per_tensor=max_coords_per_tensor,
            seed=seed,
        ),
        "triple_branch": grad_check(
            lambda a, c, i: F.mean(triple(a, c, i)),
            [window(), window(), window()],
            triple.parameters(),
            epsilon=epsilon,
            max_coords_per_tensor=max_coords_per_tensor,
            seed=seed,
        ),
    }
    for name, error in errors.items():
        logger.info(f"🔍 grad_check {name}: {error:.3e}")
    return errors
