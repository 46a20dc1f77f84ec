"""
Минимальное ядро плотных тензоров с обратным распространением градиента.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import grad_check, layer_suite
from .layers import Conv2d, Linear, MaxPool2d, Module, SelfAttentionPooling
from .optim import Optimizer, effective_learning_rate, optimizer_step
from .tensor import Param, Tensor

__all__ = [
    "Tensor",
    "Param",
    "Module",
    "Linear",
    "Conv2d",
    "MaxPool2d",
    "SelfAttentionPooling",
    "Optimizer",
    "optimizer_step",
    "effective_learning_rate",
    "grad_check",
    "layer_suite",
    "save_checkpoint",
    "load_checkpoint",
]
