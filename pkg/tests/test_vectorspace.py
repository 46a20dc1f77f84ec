"""
Тесты косинусного сравнения, отбора соседей и разбиения манифеста.
"""

import math

import numpy as np
import pytest

from schemas.configs import ImpostorRule, MiningConfig
from schemas.records import ManifestEntry
from utils.exceptions import DegenerateInputError, PoolTooSmallError, ShapeError
from vectorspace import (
    VectorSet,
    build_pairs_and_triplets,
    cosine_score,
    mine,
    mine_clients,
    mine_impostors,
    purity_report,
    split_heldout,
    split_subsets,
    top_k_neighbors,
)
from vectorspace.io import read_pairs, write_pairs


def unit(score: float) -> list[float]:
    """2-мерный единичный вектор с косинусом score к оси [1, 0]."""
    return [score, math.sqrt(1.0 - score**2)]


def scored_set(anchor: str, scores: dict[str, float]) -> VectorSet:
    ids = [anchor, *scores]
    return VectorSet(ids, [[1.0, 0.0], *(unit(s) for s in scores.values())])


def manifest_of(speaker_of: dict[str, str]) -> list[ManifestEntry]:
    return [
        ManifestEntry(id=utt, path=f"{utt}.wav", speaker=speaker)
        for utt, speaker in speaker_of.items()
    ]


# =============================================================================
# Косинус и top-k
# =============================================================================


class TestCosine:
    def test_hand_values(self):
        assert cosine_score([3.0, 4.0], [3.0, 4.0]) == 1.0
        assert cosine_score([1.0, 0.0], [0.0, 1.0]) == 0.0
        assert math.isclose(cosine_score([1.0, 1.0], [1.0, 0.0]), 1 / math.sqrt(2))

    def test_symmetric_and_scale_invariant(self, rng):
        x, y = rng.standard_normal((2, 400))
        assert abs(cosine_score(x, y) - cosine_score(y, x)) < 1e-12
        assert math.isclose(cosine_score(x, 7.5 * x), 1.0)

    def test_zero_vector(self):
        with pytest.raises(DegenerateInputError):
            cosine_score([0.0, 0.0], [1.0, 0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            cosine_score([1.0, 0.0], [1.0, 0.0, 0.0])


class TestTopK:
    def test_hand_example(self):
        pool = scored_set("a", {"b": 0.9, "c": 0.8, "d": 0.5})
        result = top_k_neighbors("a", pool.get("a"), pool, k=2)
        assert [utt for utt, _ in result] == ["b", "c"]
        assert math.isclose(result[0][1], 0.9)

    def test_k_equals_pool(self):
        pool = scored_set("a", {"d": 0.5, "b": 0.9, "c": 0.8})
        result = top_k_neighbors("a", pool.get("a"), pool, k=3)
        assert [utt for utt, _ in result] == ["b", "c", "d"]

    def test_tie_breaks_by_id(self):
        pool = scored_set("a", {"u2": 0.8, "u1": 0.8})
        assert top_k_neighbors("a", pool.get("a"), pool, k=1)[0][0] == "u1"

    def test_pool_too_small(self):
        pool = scored_set("a", {"b": 0.9, "c": 0.8})
        with pytest.raises(PoolTooSmallError) as info:
            top_k_neighbors("a", pool.get("a"), pool, k=3)
        assert info.value.available == 2

    def test_matches_brute_force(self, rng):
        """Оракул: полный перебор cosine_score и сортировка (−score, id)."""
        ids = [f"u{i:03d}" for i in range(150)]
        pool = VectorSet(ids, rng.standard_normal((150, 20)))
        for anchor in ("u000", "u077", "u149"):
            scored = [
                (utt, cosine_score(pool.get(anchor), pool.get(utt))) for utt in ids if utt != anchor
            ]
            expected = sorted(
                scored,
                key=lambda item: (-item[1], item[0]),
            )[:12]
            result = top_k_neighbors(anchor, pool.get(anchor), pool, k=12)
            assert [u for u, _ in result] == [u for u, _ in expected]
            np.testing.assert_allclose([s for _, s in result], [s for _, s in expected])


# =============================================================================
# Отбор клиентов и импостеров
# =============================================================================


class TestMining:
    @pytest.mark.parametrize(
        "threshold, expected", [(0.6, ["b", "c"]), (0.85, ["b"]), (1.0, [])]
    )
    def test_client_threshold(self, threshold, expected):
        subset_a = scored_set("a", {"b": 0.9, "c": 0.8, "d": 0.5})
        config = MiningConfig(k=2, client_threshold=threshold)
        assert mine_clients("a", subset_a, config) == expected

    @pytest.mark.parametrize(
        "threshold, expected", [(0.6, ["y", "z"]), (1.0, ["x", "y"])]
    )
    def test_impostor_cap(self, threshold, expected):
        subset_a = VectorSet(["a"], [[1.0, 0.0]])
        subset_b = scored_set("w", {"x": 0.7, "y": 0.4, "z": 0.1}).subset(["x", "y", "z"])
        config = MiningConfig(k=2, impostor_threshold=threshold)
        assert mine_impostors("a", subset_a, subset_b, config) == expected

    def test_top_k_then_threshold_rule(self):
        subset_a = VectorSet(["a"], [[1.0, 0.0]])
        subset_b = scored_set("w", {"x": 0.7, "y": 0.4, "z": 0.1}).subset(["x", "y", "z"])
        config = MiningConfig(
            k=2, impostor_threshold=0.6, impostor_rule=ImpostorRule.TOP_K_THEN_THRESHOLD
        )
        assert mine_impostors("a", subset_a, subset_b, config) == ["y"]

    def test_empty_subset_b(self):
        subset_a = VectorSet(["a"], [[1.0, 0.0]])
        empty = VectorSet([], np.zeros((0, 2)))
        assert mine_impostors("a", subset_a, empty, MiningConfig(k=2)) == []

    def test_single_client_single_impostor(self):
        pairs, triplets = build_pairs_and_triplets({"a": ["b"]}, {"a": ["y"]}, k=10)
        assert pairs == [("a", "b", 1), ("a", "y", 0)]
        assert triplets == [("a", "b", "y")]

    def test_clients_without_impostors(self):
        pairs, triplets = build_pairs_and_triplets({"a": ["b", "c"]}, {"a": []}, k=10)
        assert pairs == [("a", "b", 1), ("a", "c", 1)]
        assert triplets == []

    def test_round_robin_cap(self):
        clients = {f"a{n}": [f"c{n}_{j}" for j in range(10)] for n in range(3)}
        impostors = {f"a{n}": [f"i{n}_{j}" for j in range(10)] for n in range(3)}
        pairs, triplets = build_pairs_and_triplets(clients, impostors, k=10)
        assert len(pairs) == 60
        assert len(triplets) == 30
        assert triplets[:2] == [("a0", "c0_0", "i0_0"), ("a0", "c0_1", "i0_1")]

    def test_full_cross(self):
        pairs, triplets = build_pairs_and_triplets(
            {"a": ["b", "c"]}, {"a": ["x", "y", "z"]}, k=10, full_cross=True
        )
        assert len(triplets) == 6

    def test_anchor_without_clients_is_dropped(self):
        pairs, triplets = build_pairs_and_triplets({"a": []}, {"a": ["y"]}, k=10)
        assert pairs == [] and triplets == []


class TestMineEndToEnd:
    @pytest.fixture
    def subsets(self, separable_vectors):
        vectors, speaker_of = separable_vectors
        split = split_subsets(manifest_of(speaker_of), fraction=0.5, seed=0)
        return vectors.subset(split.subset_a), vectors.subset(split.subset_b), speaker_of

    def test_purity_on_separable_speakers(self, subsets):
        subset_a, subset_b, speaker_of = subsets
        artifacts, report = mine(subset_a, subset_b, MiningConfig(k=9, client_threshold=0.5))
        purity = purity_report(artifacts, speaker_of)
        assert purity.client_pair_purity >= 0.95
        assert purity.triplet_validity >= 0.9
        assert report.anchors_processed == len(subset_a)
        assert report.pairs == len(artifacts.pairs)

    def test_invariants(self, subsets):
        subset_a, subset_b, _ = subsets
        config = MiningConfig(k=5, client_threshold=0.5)
        artifacts, _ = mine(subset_a, subset_b, config)
        for ranked in artifacts.neighbor_lists.values():
            assert all(score >= config.client_threshold for _, score in ranked)
        impostor_ids = {o for _, o, label in artifacts.pairs if label == 0}
        assert impostor_ids <= set(subset_b.ids)
        for anchor, other, label in artifacts.pairs:
            mined = artifacts.neighbor_lists if label == 1 else artifacts.impostor_lists
            assert other in [utt for utt, _ in mined[anchor]]

    def test_chunked_parallel_matches_serial(self, subsets):
        subset_a, subset_b, _ = subsets
        serial, _ = mine(subset_a, subset_b, MiningConfig(k=4))
        chunked, _ = mine(subset_a, subset_b, MiningConfig(k=4, chunk_size=7), workers=3)
        assert chunked.pairs == serial.pairs
        assert chunked.triplets == serial.triplets

    def test_pairs_file_format(self, tmp_path):
        path = write_pairs(tmp_path / "pairs.txt", [("a", "b", 1), ("a", "y", 0)])
        assert path.read_text(encoding="utf-8") == "1 a b\n0 a y\n"
        assert read_pairs(path) == [("a", "b", 1), ("a", "y", 0)]

    def test_pairs_file_bad_label(self, tmp_path):
        path = tmp_path / "pairs.txt"
        path.write_text("2 a b\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_pairs(path)


# =============================================================================
# Разбиение манифеста
# =============================================================================


class TestSplit:
    def test_utterance_split_halves(self):
        manifest = [ManifestEntry(id=f"u{i:03d}", path="x.wav") for i in range(100)]
        split = split_subsets(manifest, fraction=0.5, seed=3)
        assert len(split.subset_a) == 50 and len(split.subset_b) == 50
        assert not set(split.subset_a) & set(split.subset_b)
        assert split == split_subsets(manifest, fraction=0.5, seed=3)

    def test_speaker_split_keeps_speakers_whole(self):
        speaker_of = {f"s{s}-u{u}": f"s{s}" for s in range(10) for u in range(4)}
        split = split_subsets(manifest_of(speaker_of), fraction=0.5, seed=0)
        speakers_a = {speaker_of[u] for u in split.subset_a}
        speakers_b = {speaker_of[u] for u in split.subset_b}
        assert len(speakers_a) == 5 and len(speakers_b) == 5
        assert not speakers_a & speakers_b

    def test_empty_manifest(self):
        with pytest.raises(ValueError):
            split_subsets([], fraction=0.5, seed=0)

    def test_heldout_takes_last_utterances(self):
        speaker_of = {f"s{s}-u{u}": f"s{s}" for s in range(3) for u in range(4)}
        train, evaluation = split_heldout(manifest_of(speaker_of), heldout_per_speaker=1)
        assert [e.id for e in evaluation] == ["s0-u3", "s1-u3", "s2-u3"]
        assert len(train) == 9

    def test_heldout_needs_labels(self):
        with pytest.raises(ValueError):
            split_heldout([ManifestEntry(id="u", path="u.wav")], heldout_per_speaker=1)

    def test_heldout_too_few_utterances(self):
        speaker_of = {"s0-u0": "s0", "s0-u1": "s0"}
        with pytest.raises(ValueError):
            split_heldout(manifest_of(speaker_of), heldout_per_speaker=2)
