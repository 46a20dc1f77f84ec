"""
Косинусное сравнение векторов дикторов и самообучаемый отбор
соседей, пар клиент/импостер и триплетов.
"""

from .collection import VectorSet
from .mining import (
    build_pairs_and_triplets,
    mine,
    mine_clients,
    mine_impostors,
    purity_report,
)
from .scoring import cosine_rows, cosine_score, top_k_neighbors
from .split import split_heldout, split_subsets

__all__ = [
    "VectorSet",
    "cosine_score",
    "cosine_rows",
    "top_k_neighbors",
    "mine_clients",
    "mine_impostors",
    "build_pairs_and_triplets",
    "mine",
    "purity_report",
    "split_subsets",
    "split_heldout",
]
