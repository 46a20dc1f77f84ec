"""
Самообучаемый отбор пар и триплетов в пространстве i-vector.

Для каждого якоря из A: k ближайших в A (без самого якоря) с порогом
client_threshold - клиенты; кандидаты из B (дикторы B считаются
непересекающимися с A) с ограничением impostor_threshold - импостеры.
Метки дикторов при отборе не используются.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping

import numpy as np

from schemas.configs import ImpostorRule, MiningConfig
from schemas.records import MiningArtifacts, MiningReport, PurityReport
from vectorspace.collection import VectorSet
from vectorspace.scoring import cosine_rows, rank_candidates

logger = logging.getLogger(__name__)

Ranked = list[tuple[str, float]]


def _select_clients(
    anchor_id: str, ids: np.ndarray, scores: np.ndarray, config: MiningConfig
) -> Ranked:
    keep = ids != anchor_id
    ranked = rank_candidates(ids[keep], scores[keep], config.k)
    return [(utt, score) for utt, score in ranked if score >= config.client_threshold]


def _select_impostors(ids: np.ndarray, scores: np.ndarray, config: MiningConfig) -> Ranked:
    if len(ids) == 0:
        return []
    if config.impostor_rule == ImpostorRule.TOP_K_THEN_THRESHOLD:
        ranked = rank_candidates(ids, scores, config.k)
        return [(u, s) for u, s in ranked if s <= config.impostor_threshold]
    # hardest_top_k и top_k_below_threshold: сначала порог, затем top-k
    allowed = scores <= config.impostor_threshold
    return rank_candidates(ids[allowed], scores[allowed], config.k)


def mine_clients(anchor_id: str, subset_a: VectorSet, config: MiningConfig) -> list[str]:
    """
    Клиенты якоря: top-k по косинусу внутри A (A×A, без самого якоря),
    затем отсечение по score ≥ client_threshold. Результат ≤ k, может быть пуст.
    """
    ids = np.array(subset_a.ids, dtype=str)
    scores = cosine_rows(subset_a.get(anchor_id), subset_a.matrix)[0]
    return [utt for utt, _ in _select_clients(anchor_id, ids, scores, config)]


def mine_impostors(
    anchor_id: str, subset_a: VectorSet, subset_b: VectorSet, config: MiningConfig
) -> list[str]:
    """
    Импостеры якоря: кандидаты только из B (A×B) с ограничением
    score ≤ impostor_threshold. Результат ≤ k, пуст при пустом B.
    """
    if len(subset_b) == 0:
        return []
    ids = np.array(subset_b.ids, dtype=str)
    scores = cosine_rows(subset_a.get(anchor_id), subset_b.matrix)[0]
    return [utt for utt, _ in _select_impostors(ids, scores, config)]


def build_pairs_and_triplets(
    clients: Mapping[str, list[str]],
    impostors: Mapping[str, list[str]],
    k: int,
    full_cross: bool = False,
) -> tuple[list[tuple[str, str, int]], list[tuple[str, str, str]]]:
    """
    Пары (anchor, client, 1) / (anchor, impostor, 0) и триплеты.

    Триплеты по умолчанию - round-robin: client[j % nc] с impostor[j % ni]
    для j < min(k, max(nc, ni)); full_cross=True - полное произведение.
    Якоря без клиентов в пары не попадают.
    """
    pairs: list[tuple[str, str, int]] = []
    triplets: list[tuple[str, str, str]] = []
    for anchor in sorted(clients):
        anchor_clients = clients[anchor]
        if not anchor_clients:
            continue
        anchor_impostors = impostors.get(anchor, [])
        pairs.extend((anchor, client, 1) for client in anchor_clients)
        pairs.extend((anchor, impostor, 0) for impostor in anchor_impostors)
        if not anchor_impostors:
            continue
        if full_cross:
            combos = [(c, i) for c in anchor_clients for i in anchor_impostors]
        else:
            nc, ni = len(anchor_clients), len(anchor_impostors)
            combos = [
                (anchor_clients[j % nc], anchor_impostors[j % ni])
                for j in range(min(k, max(nc, ni)))
            ]
        triplets.extend((anchor, c, i) for c, i in combos if c != i)
    return pairs, triplets


def _mine_chunk(
    anchor_ids: list[str],
    subset_a: VectorSet,
    subset_b: VectorSet,
    config: MiningConfig,
) -> list[tuple[str, Ranked, Ranked]]:
    ids_a = np.array(subset_a.ids, dtype=str)
    ids_b = np.array(subset_b.ids, dtype=str)
    queries = subset_a.subset(anchor_ids).matrix
    scores_aa = cosine_rows(queries, subset_a.matrix)
    scores_ab = cosine_rows(queries, subset_b.matrix)
    results = []
    for row, anchor in enumerate(anchor_ids):
        clients = _select_clients(anchor, ids_a, scores_aa[row], config)
        impostors = _select_impostors(ids_b, scores_ab[row], config)
        results.append((anchor, clients, impostors))
    return results


def mine(
    subset_a: VectorSet,
    subset_b: VectorSet,
    config: MiningConfig,
    workers: int = 1,
) -> tuple[MiningArtifacts, MiningReport]:
    """
    Полный цикл отбора по всем якорям A.

    Матрицы оценок считаются блоками по config.chunk_size якорей, поэтому
    память O(chunk × |пул|). Блоки можно считать параллельно; порядок
    результата всегда по возрастанию id якоря.
    """
    anchors = sorted(subset_a.ids)
    chunks = [
        anchors[start : start + config.chunk_size]
        for start in range(0, len(anchors), config.chunk_size)
    ]
    logger.info(
        f"🔍 Отбор: |A|={len(subset_a)}, |B|={len(subset_b)}, k={config.k}, "
        f"порог клиентов={config.client_threshold}, "
        f"порог импостеров={config.impostor_threshold} ({config.impostor_rule.value})"
    )

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunk_results = list(
                pool.map(lambda c: _mine_chunk(c, subset_a, subset_b, config), chunks)
            )
    else:
        chunk_results = [_mine_chunk(c, subset_a, subset_b, config) for c in chunks]

    neighbor_lists: dict[str, Ranked] = {}
    impostor_lists: dict[str, Ranked] = {}
    for results in chunk_results:
        for anchor, clients, impostors in results:
            neighbor_lists[anchor] = clients
            impostor_lists[anchor] = impostors

    pairs, triplets = build_pairs_and_triplets(
        {a: [u for u, _ in r] for a, r in neighbor_lists.items()},
        {a: [u for u, _ in r] for a, r in impostor_lists.items()},
        config.k,
        full_cross=config.full_cross_triplets,
    )
    report = MiningReport(
        anchors_processed=len(anchors),
        anchors_without_clients=sum(1 for r in neighbor_lists.values() if not r),
        anchors_without_impostors=sum(1 for r in impostor_lists.values() if not r),
        client_pairs=sum(1 for p in pairs if p[2] == 1),
        impostor_pairs=sum(1 for p in pairs if p[2] == 0),
        pairs=len(pairs),
        triplets=len(triplets),
    )
    if report.anchors_without_clients:
        logger.warning(
            f"⚠️ {report.anchors_without_clients} якорей без клиентов выше порога "
            "- исключены из пар"
        )
    if report.anchors_without_impostors:
        logger.warning(f"⚠️ {report.anchors_without_impostors} якорей без импостеров")
    logger.info(f"✅ Отобрано пар: {report.pairs}, триплетов: {report.triplets}")

    artifacts = MiningArtifacts(
        neighbor_lists=neighbor_lists,
        impostor_lists=impostor_lists,
        pairs=pairs,
        triplets=triplets,
    )
    return artifacts, report


def purity_report(
    artifacts: MiningArtifacts, speaker_of: Mapping[str, str]
) -> PurityReport:
    """
    Чистота отбора по истинным меткам дикторов.

    client_pair_purity - доля пар с меткой 1 от того же диктора;
    impostor_pair_purity - доля пар с меткой 0 от другого диктора;
    triplet_validity - клиент того же диктора И импостер другого.
    """

    def fraction(hits: list[bool]) -> float | None:
        return float(np.mean(hits)) if hits else None

    client_hits = [
        speaker_of[a] == speaker_of[o] for a, o, label in artifacts.pairs if label == 1
    ]
    impostor_hits = [
        speaker_of[a] != speaker_of[o] for a, o, label in artifacts.pairs if label == 0
    ]
    triplet_hits = [
        speaker_of[a] == speaker_of[c] and speaker_of[a] != speaker_of[i]
        for a, c, i in artifacts.triplets
    ]
    return PurityReport(
        client_pair_purity=fraction(client_hits),
        impostor_pair_purity=fraction(impostor_hits),
        triplet_validity=fraction(triplet_hits),
    )
