"""
Systems 2 и 3: общий VGG-энкодер, двух- и трёхветочные сиамские сети.
"""

from .checks import model_suite
from .inference import extract_embeddings, score_double
from .model import (
    DoubleBranchModel,
    Encoder,
    TripleBranchModel,
    double_forward,
    encoder_forward,
    load_siamese,
    save_siamese,
)
from .training import build_double, build_triple, resolve_profile, train_double, train_triple

__all__ = [
    "Encoder",
    "DoubleBranchModel",
    "TripleBranchModel",
    "encoder_forward",
    "double_forward",
    "save_siamese",
    "load_siamese",
    "build_double",
    "build_triple",
    "resolve_profile",
    "train_double",
    "train_triple",
    "extract_embeddings",
    "score_double",
    "model_suite",
]
