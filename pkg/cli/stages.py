"""
Стадии пайплайна.

Каждая стадия читает выходы предыдущих из рабочего каталога, вызывает
одну операцию доменного пакета и пишет свои выходы в файлы.
"""

import argparse
import logging
from pathlib import Path

from autoencoder import build_training_pairs, extract_ae_vectors, load_ae, save_ae, train_ae
from cli.runner import StageResult, StageSpec
from config import PipelineConfig
from evaluation import (
    build_trials,
    evaluate,
    fuse_scores,
    read_scores,
    read_trials,
    score_trials,
    tune_fusion,
    write_scores,
    write_trials,
)
from features import FeatureStore, featurize_manifest, synth_corpus
from features.synth import MANIFEST_NAME, VECTORS_NAME, WAV_DIR
from nncore import layer_suite
from schemas.records import ManifestEntry, SubsetSplit, Trial
from siamese import (
    build_double,
    build_triple,
    extract_embeddings,
    load_siamese,
    model_suite,
    save_siamese,
    score_double,
    train_double,
    train_triple,
)
from utils.exceptions import CheckpointFormatError, ContractViolation
from utils.io import write_json
from vectorspace import mine, purity_report, split_heldout, split_subsets
from vectorspace.io import (
    read_manifest,
    read_pairs,
    read_triplets,
    read_vectors,
    write_manifest,
    write_pairs,
    write_triplets,
    write_vectors,
)

logger = logging.getLogger(__name__)

AE_MODEL = "ae.ssvm"
AE_VECTORS = "ae_vectors.jsonl"
EMBEDDINGS = "embeddings.jsonl"
SYSTEMS = ("system1", "system2", "system3")
# Порог проверки градиентов
GRAD_TOLERANCE = 1e-3


def _speaker_map(entries: list[ManifestEntry]) -> dict[str, str]:
    return {e.id: e.speaker for e in entries if e.speaker is not None}


def _siamese_path(config: PipelineConfig, kind: str) -> Path:
    return config.paths.models_dir / f"{kind}.ssvm"


def _trials_path(config: PipelineConfig, value: str | None, default: str) -> Path:
    return Path(value) if value else config.paths.trials_dir / f"{default}.txt"


def _system_scores(
    config: PipelineConfig, args: argparse.Namespace, trials_path: Path
) -> list[Path]:
    given = [args.s1, args.s2, args.s3]
    return [
        Path(path) if path else config.paths.scores_dir / f"{system}.{trials_path.stem}.txt"
        for system, path in zip(SYSTEMS, given)
    ]


# ============================================
# Корпус и признаки
# ============================================


def synth_corpus_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    """Синтетический корпус (или готовый манифест) + разбиение на обучение/оценку."""
    paths, corpus = config.paths, config.corpus
    if corpus.synthetic:
        if paths.manifest or paths.ivectors:
            raise ContractViolation(
                "corpus.synthetic=true несовместим с paths.manifest / paths.ivectors"
            )
        synth = synth_corpus(
            corpus.num_speakers,
            corpus.utts_per_speaker,
            config.seed,
            out_dir=paths.corpus_dir,
            duration=corpus.duration,
            sample_rate=config.features.sample_rate,
            snr_db=corpus.snr_db,
            vector_noise=corpus.vector_noise,
        )
        entries = synth.manifest
        inputs = []
        outputs = [
            paths.corpus_dir / MANIFEST_NAME,
            paths.corpus_dir / VECTORS_NAME,
            paths.corpus_dir / WAV_DIR,
        ]
    else:
        entries = read_manifest(paths.manifest_path)
        inputs, outputs = [paths.manifest_path], []

    train, evaluation = split_heldout(entries, corpus.heldout_per_speaker)
    write_manifest(paths.train_manifest, train)
    write_manifest(paths.eval_manifest, evaluation)
    return StageResult(
        inputs=inputs,
        outputs=[*outputs, paths.train_manifest, paths.eval_manifest],
        counters={
            "utterances": len(entries),
            "speakers": len(set(_speaker_map(entries).values())),
            "train": len(train),
            "eval": len(evaluation),
        },
    )


def featurize_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    manifest_path = config.paths.manifest_path
    entries = read_manifest(manifest_path)
    store = featurize_manifest(
        entries,
        manifest_path.parent,
        config.paths.features_dir,
        config.features,
        workers=config.workers,
    )
    return StageResult(
        inputs=[manifest_path],
        outputs=[config.paths.features_dir],
        counters={"utterances": len(store.ids()), "n_mels": config.features.n_mels},
    )


# ============================================
# Отбор пар и триплетов
# ============================================


def mine_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    """
    Отбор клиентов в A и импостеров в B без меток дикторов.

    Метки (если есть в манифесте) используются только для отчёта о чистоте.
    """
    paths = config.paths
    train = read_manifest(paths.train_manifest)
    vectors = read_vectors(paths.ivectors_path)
    inputs = [paths.ivectors_path, paths.train_manifest]

    if paths.open_vectors:
        subset_a = vectors.subset(e.id for e in train)
        subset_b = read_vectors(paths.open_vectors)
        inputs.append(Path(paths.open_vectors))
        split = SubsetSplit(subset_a=subset_a.ids, subset_b=subset_b.ids)
    else:
        split = split_subsets(train, config.mining.subset_fraction, config.seed)
        subset_a, subset_b = vectors.subset(split.subset_a), vectors.subset(split.subset_b)

    artifacts, report = mine(subset_a, subset_b, config.mining, workers=config.workers)
    speaker_of = _speaker_map(train)
    mined = {utt for pair in artifacts.pairs for utt in pair[:2]}
    if mined and mined <= speaker_of.keys():
        purity = purity_report(artifacts, speaker_of)
        report = report.model_copy(update={"purity": purity})
        logger.info(f"🔍 Чистота отбора: {purity.model_dump()}")

    outputs = [
        write_pairs(paths.mining_dir / "pairs.txt", artifacts.pairs),
        write_triplets(paths.mining_dir / "triplets.txt", artifacts.triplets),
        write_json(paths.mining_dir / "split.json", split),
        write_json(paths.mining_dir / "mining_report.json", report),
    ]
    counters = report.model_dump(exclude={"purity"})
    if report.purity is not None:
        counters.update(report.purity.model_dump())
    return StageResult(inputs=inputs, outputs=outputs, counters=counters)


# ============================================
# System-1: автоэнкодер
# ============================================


def train_ae_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    paths = config.paths
    train = read_manifest(paths.train_manifest)
    vectors = read_vectors(paths.ivectors_path).subset(e.id for e in train)
    pairs = build_training_pairs(vectors, config.ae.neighbor_k)
    model, history = train_ae(vectors, pairs, config.ae)

    model_path = save_ae(
        model, paths.models_dir / AE_MODEL, train_config=config.ae.model_dump(mode="json")
    )
    return StageResult(
        inputs=[paths.ivectors_path, paths.train_manifest],
        outputs=[model_path, write_json(paths.models_dir / "ae.history.json", history)],
        counters={
            "pairs": len(pairs),
            "epochs": len(history.epoch_losses),
            "first_loss": history.epoch_losses[0],
            "final_loss": history.epoch_losses[-1],
        },
    )


def extract_ae_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    paths = config.paths
    model_path = paths.models_dir / AE_MODEL
    model = load_ae(model_path)
    ids = [e.id for e in read_manifest(paths.eval_manifest)]
    vectors = read_vectors(paths.ivectors_path).subset(ids)
    ae_vectors = extract_ae_vectors(model, vectors, config.ae.length_normalize)
    out = write_vectors(paths.vectors_dir / AE_VECTORS, ae_vectors)
    return StageResult(
        inputs=[model_path, paths.ivectors_path, paths.eval_manifest],
        outputs=[out],
        counters={"vectors": len(ae_vectors)},
    )


# ============================================
# Systems 2 и 3: сиамские сети
# ============================================


def _history_counters(history) -> dict:
    counters = {
        "epochs": len(history.epoch_losses),
        "first_loss": history.epoch_losses[0],
        "final_loss": history.epoch_losses[-1],
    }
    if history.active_fractions:
        counters["final_active_fraction"] = history.active_fractions[-1]
    return counters


def train_double_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    paths = config.paths
    pairs_path = paths.mining_dir / "pairs.txt"
    pairs = read_pairs(pairs_path)
    store = FeatureStore(paths.features_dir)
    model = build_double(config.siamese, config.features.n_mels)
    model, history = train_double(model, pairs, store, config.siamese)

    model_path = save_siamese(
        model, _siamese_path(config, "double"), config.siamese.model_dump(mode="json")
    )
    return StageResult(
        inputs=[pairs_path, paths.features_dir],
        outputs=[model_path, write_json(paths.models_dir / "double.history.json", history)],
        counters={"pairs": len(pairs), **_history_counters(history)},
    )


def train_triple_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    paths = config.paths
    triplets_path = paths.mining_dir / "triplets.txt"
    triplets = read_triplets(triplets_path)
    store = FeatureStore(paths.features_dir)
    model = build_triple(config.siamese, config.features.n_mels)
    model, history = train_triple(model, triplets, store, config.siamese)

    model_path = save_siamese(
        model, _siamese_path(config, "triple"), config.siamese.model_dump(mode="json")
    )
    return StageResult(
        inputs=[triplets_path, paths.features_dir],
        outputs=[model_path, write_json(paths.models_dir / "triple.history.json", history)],
        counters={"triplets": len(triplets), **_history_counters(history)},
    )


def extract_embeddings_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    """Эмбеддинги оценочных высказываний энкодером выбранной модели."""
    paths = config.paths
    model_path = _siamese_path(config, args.model)
    model = load_siamese(model_path)
    ids = [e.id for e in read_manifest(paths.eval_manifest)]
    embeddings = extract_embeddings(
        model, ids, FeatureStore(paths.features_dir), workers=config.workers
    )
    name = EMBEDDINGS if args.model == "triple" else f"{args.model}_{EMBEDDINGS}"
    out = write_vectors(paths.vectors_dir / name, embeddings)
    return StageResult(
        inputs=[model_path, paths.eval_manifest, paths.features_dir],
        outputs=[out],
        counters={"embeddings": len(embeddings), "dim": embeddings.dim},
        label=None if args.model == "triple" else args.model,
    )


# ============================================
# Трайлы, оценки, метрики, слияние
# ============================================


def _stratified_halves(trials: list[Trial]) -> tuple[list[Trial], list[Trial]]:
    """Чётные по счёту внутри своего класса - в первую половину."""
    seen = {True: 0, False: 0}
    first, second = [], []
    for trial in trials:
        (first if seen[trial.is_target] % 2 == 0 else second).append(trial)
        seen[trial.is_target] += 1
    return first, second


def make_trials_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    """
    Непересекающиеся сбалансированные списки val и test по отложенным
    высказываниям, по corpus.num_trials трайлов в каждом.
    """
    paths = config.paths
    entries = read_manifest(paths.eval_manifest)
    speaker_of = _speaker_map(entries)
    trials = build_trials(
        [e.id for e in entries], speaker_of, 2 * config.corpus.num_trials, config.seed
    )
    val, test = _stratified_halves(trials)
    outputs = [
        write_trials(paths.trials_dir / "val.txt", val),
        write_trials(paths.trials_dir / "test.txt", test),
    ]
    return StageResult(
        inputs=[paths.eval_manifest],
        outputs=outputs,
        counters={"val": len(val), "test": len(test)},
    )


def score_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    paths = config.paths
    trials_path = _trials_path(config, args.trials, "test")
    trials = read_trials(trials_path)
    system = args.system

    if system == "system2":
        model_path = _siamese_path(config, "double")
        model = load_siamese(model_path)
        if model.kind != "double":
            raise CheckpointFormatError(f"{model_path}: ожидается двухветочная модель")
        scoreset = score_double(
            model, trials, FeatureStore(paths.features_dir), config.workers, system
        )
        inputs = [trials_path, model_path, paths.features_dir]
    else:
        vectors_path = {
            "ivector": paths.ivectors_path,
            "system1": paths.vectors_dir / AE_VECTORS,
            "system3": paths.vectors_dir / EMBEDDINGS,
        }[system]
        scoreset = score_trials(read_vectors(vectors_path), trials, system)
        inputs = [trials_path, vectors_path]

    out = Path(args.out) if args.out else paths.scores_dir / f"{system}.{trials_path.stem}.txt"
    write_scores(out, scoreset)
    return StageResult(
        inputs=inputs,
        outputs=[out],
        counters={"trials": len(trials)},
        label=f"{system}.{trials_path.stem}",
    )


def evaluate_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    """Метрики одного файла оценок: <scores>.metrics.json рядом с ним."""
    trials_path, scores_path = Path(args.trials), Path(args.scores)
    system = args.system or scores_path.name.split(".")[0]
    scoreset = read_scores(scores_path, system, read_trials(trials_path))
    report = evaluate(scoreset, config.eval.dcf)
    out = write_json(scores_path.with_suffix(".metrics.json"), report)
    return StageResult(
        inputs=[trials_path, scores_path],
        outputs=[out],
        counters={"eer": report.eer, "min_dcf": report.min_dcf, "trials": report.trials},
        label=scores_path.stem,
    )


def fuse_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    paths = config.paths
    trials_path = _trials_path(config, args.trials, "test")
    trials = read_trials(trials_path)
    score_paths = _system_scores(config, args, trials_path)
    s1, s2, s3 = (
        read_scores(path, system, trials) for system, path in zip(SYSTEMS, score_paths)
    )
    weights = config.eval.fusion
    fused = fuse_scores(s1, s2, s3, weights, normalize=config.eval.normalize)

    out = Path(args.out) if args.out else paths.scores_dir / f"fusion.{trials_path.stem}.txt"
    write_scores(out, fused)
    return StageResult(
        inputs=[trials_path, *score_paths],
        outputs=[out],
        counters={"alpha": weights.alpha, "beta": weights.beta, "trials": len(trials)},
        label=trials_path.stem,
    )


def tune_fusion_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    """Подбор α, β по размеченному списку валидации."""
    paths = config.paths
    trials_path = _trials_path(config, args.trials, "val")
    trials = read_trials(trials_path)
    score_paths = _system_scores(config, args, trials_path)
    s1, s2, s3 = (
        read_scores(path, system, trials) for system, path in zip(SYSTEMS, score_paths)
    )
    search = tune_fusion(
        s1,
        s2,
        s3,
        grid_step=config.eval.grid_step,
        params=config.eval.dcf,
        normalize=config.eval.normalize,
        workers=config.workers,
    )
    outputs = [
        write_json(paths.reports_dir / "fusion_search.json", search),
        write_json(paths.reports_dir / "fusion_weights.json", search.weights),
    ]
    return StageResult(
        inputs=[trials_path, *score_paths],
        outputs=outputs,
        counters={
            **search.weights.model_dump(),
            "eer": search.eer,
            "min_dcf": search.min_dcf,
            "evaluations": search.evaluations,
        },
    )


def gradcheck_stage(config: PipelineConfig, args: argparse.Namespace) -> StageResult:
    """Градиенты всех слоёв и обеих моделей (профиль tiny)."""
    errors = {
        **layer_suite(epsilon=args.eps, seed=config.seed),
        **model_suite(epsilon=args.eps, max_coords_per_tensor=args.coords, seed=config.seed),
    }
    worst = max(errors, key=errors.get)
    out = write_json(
        config.paths.reports_dir / "gradcheck.json",
        {"errors": errors, "tolerance": GRAD_TOLERANCE, "worst": worst},
    )
    if errors[worst] >= GRAD_TOLERANCE:
        logger.error(f"❌ grad_check {worst}: {errors[worst]:.3e} ≥ {GRAD_TOLERANCE}")
        raise ContractViolation(
            f"grad_check: {worst} даёт относительную ошибку {errors[worst]:.3e}"
        )
    return StageResult(outputs=[out], counters={"max_error": errors[worst], "checks": len(errors)})


def _root(config: PipelineConfig) -> Path:
    return config.paths.root


STAGES: dict[str, StageSpec] = {
    spec.name: spec
    for spec in (
        StageSpec(
            "synth-corpus",
            synth_corpus_stage,
            lambda c: c.paths.corpus_dir,
            "синтетический корпус и разбиение обучение/оценка",
        ),
        StageSpec("featurize", featurize_stage, _root, "лог-мел признаки всех высказываний"),
        StageSpec(
            "mine", mine_stage, lambda c: c.paths.mining_dir, "отбор пар и триплетов без меток"
        ),
        StageSpec(
            "train-ae", train_ae_stage, lambda c: c.paths.models_dir, "обучение автоэнкодера"
        ),
        StageSpec(
            "extract-ae", extract_ae_stage, lambda c: c.paths.vectors_dir, "ae-vector оценки"
        ),
        StageSpec(
            "train-double",
            train_double_stage,
            lambda c: c.paths.models_dir,
            "обучение двухветочной сети (BCE)",
        ),
        StageSpec(
            "train-triple",
            train_triple_stage,
            lambda c: c.paths.models_dir,
            "обучение трёхветочной сети (triplet loss)",
        ),
        StageSpec(
            "extract-embeddings",
            extract_embeddings_stage,
            lambda c: c.paths.vectors_dir,
            "эмбеддинги энкодера",
        ),
        StageSpec(
            "make-trials",
            make_trials_stage,
            lambda c: c.paths.trials_dir,
            "списки трайлов val/test",
        ),
        StageSpec("score", score_stage, lambda c: c.paths.scores_dir, "оценки трайлов системой"),
        StageSpec("evaluate", evaluate_stage, lambda c: c.paths.scores_dir, "EER и minDCF"),
        StageSpec("fuse", fuse_stage, lambda c: c.paths.scores_dir, "слияние оценок трёх систем"),
        StageSpec(
            "tune-fusion",
            tune_fusion_stage,
            lambda c: c.paths.reports_dir,
            "подбор весов слияния",
        ),
        StageSpec(
            "gradcheck",
            gradcheck_stage,
            lambda c: c.paths.reports_dir,
            "проверка градиентов",
        ),
    )
}
