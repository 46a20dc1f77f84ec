"""
System-1: автоэнкодер ближайших соседей и ae-vector.
"""

from .model import AEModel, load_ae, save_ae
from .training import build_training_pairs, extract_ae_vectors, train_ae

__all__ = [
    "AEModel",
    "save_ae",
    "load_ae",
    "build_training_pairs",
    "train_ae",
    "extract_ae_vectors",
]
