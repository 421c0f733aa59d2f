"""End-to-end training pipeline over a labeled corpus.

Embeds every row once, splits 80/20 stratified by the four-class label,
trains the detector, then (optionally) warm-starts and fine-tunes the
reranker. The split indices and loss traces are returned so the model file
can persist them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from warntriage.core import CLASS_ORDER, WeakLabelClass
from warntriage.encoding import EmbeddingVector, channels_for, embed
from warntriage.metrics import (
    DEFAULT_GAIN_MAP,
    DEFAULT_KS,
    MetricReport,
    QueryItem,
    build_queries,
    precision_recall_f1,
    ranking_report,
)
from warntriage.model import (
    DEFAULT_HIDDEN_DIM,
    DEFAULT_THRESHOLD,
    ModelParams,
    Stage,
    TrainingConfig,
    TrainingRun,
    detector_forward_batch,
    init_full_params,
    rank_score,
    reranker_forward_batch,
    train_detector,
    train_reranker,
    warm_start_reranker,
)
from warntriage.weaklabel import LabeledCorpus, LabeledWarning

DEFAULT_TEST_FRACTION = 0.2


def corpus_digest(text: str | bytes) -> str:
    if isinstance(text, str):
        text = text.encode("utf-8")
    return hashlib.sha256(text).hexdigest()


def encode_corpus(corpus: Sequence[LabeledWarning], dim: int) -> np.ndarray:
    """One embedding row per corpus row, from stored context lines."""
    rows = [
        embed(channels_for(r.warning, code_lines=list(r.code_context) or None), dim).values
        for r in corpus
    ]
    return np.stack(rows) if rows else np.zeros((0, dim))


def stratified_split(
    labels: Sequence[WeakLabelClass],
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = 0,
) -> tuple[list[int], list[int]]:
    """Per-class shuffled split; deterministic given the seed."""
    rng = np.random.default_rng([seed, 7])
    train_idx: list[int] = []
    test_idx: list[int] = []
    for cls in CLASS_ORDER:
        members = [i for i, lbl in enumerate(labels) if lbl is cls]
        if not members:
            continue
        order = rng.permutation(len(members))
        n_test = int(round(len(members) * test_fraction))
        if len(members) > 1:
            n_test = min(max(n_test, 1), len(members) - 1)
        else:
            n_test = 0
        shuffled = [members[i] for i in order]
        test_idx.extend(shuffled[:n_test])
        train_idx.extend(shuffled[n_test:])
    return sorted(train_idx), sorted(test_idx)


@dataclass
class TrainedModel:
    params: ModelParams
    detector_run: TrainingRun
    reranker_run: TrainingRun | None
    train_indices: list[int]
    test_indices: list[int]
    embeddings: np.ndarray
    labels: list[WeakLabelClass]
    config: TrainingConfig
    threshold: float = DEFAULT_THRESHOLD
    extra_metadata: dict[str, Any] = field(default_factory=dict)

    def metadata(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "config": self.config.to_dict(),
            "detector_loss_trace": self.detector_run.loss_trace,
            "reranker_loss_trace": self.reranker_run.loss_trace if self.reranker_run else None,
            "split": {"train": self.train_indices, "test": self.test_indices},
            "threshold": self.threshold,
        }
        doc.update(self.extra_metadata)
        return doc


def train_two_stage(
    corpus: LabeledCorpus,
    embed_dim: int,
    hidden_dim: int = DEFAULT_HIDDEN_DIM,
    cfg: TrainingConfig | None = None,
    reranker_cfg: TrainingConfig | None = None,
    stage: str = "both",
    warm_start: bool = True,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    extra_metadata: dict[str, Any] | None = None,
) -> TrainedModel:
    """Fit detector (and reranker unless stage='detector') on the train split.

    warm_start=False trains the reranker from a fresh random body: the
    ablation used to measure what the warm start buys.
    """
    cfg = cfg or TrainingConfig()
    reranker_cfg = reranker_cfg or cfg
    labels = [row.target_class for row in corpus]
    X = encode_corpus(corpus.rows, embed_dim)
    train_idx, test_idx = stratified_split(labels, test_fraction, cfg.seed)

    train_vecs = [EmbeddingVector(X[i]) for i in train_idx]
    detector_data = [(v, int(corpus.rows[i].is_actionable)) for v, i in zip(train_vecs, train_idx)]
    detector_run = train_detector(detector_data, cfg, hidden_dim)

    reranker_run = None
    params = detector_run.params
    if stage == "both":
        if warm_start:
            full = warm_start_reranker(detector_run.params)
        else:
            full = init_full_params(embed_dim, hidden_dim, cfg.seed)
        reranker_data = [(v, labels[i]) for v, i in zip(train_vecs, train_idx)]
        reranker_run = train_reranker(reranker_data, full, reranker_cfg)
        params = reranker_run.params

    return TrainedModel(
        params=params,
        detector_run=detector_run,
        reranker_run=reranker_run,
        train_indices=train_idx,
        test_indices=test_idx,
        embeddings=X,
        labels=labels,
        config=cfg,
        extra_metadata=extra_metadata or {},
    )


def detector_report(
    params: ModelParams,
    X: np.ndarray,
    gold: Sequence[int],
    threshold: float = DEFAULT_THRESHOLD,
    protocol: dict[str, Any] | None = None,
) -> MetricReport:
    probs = detector_forward_batch(params, X)
    preds = [int(p >= threshold) for p in probs]
    precision, recall, f1 = precision_recall_f1(preds, list(gold))
    return MetricReport(
        precision=precision, recall=recall, f1=f1,
        protocol=dict(protocol or {}, threshold=threshold),
    )


def ranking_scores(params: ModelParams, X: np.ndarray, ids: Sequence[str]) -> dict[str, float]:
    if params.stage is not Stage.FULL:
        return {}
    probs = reranker_forward_batch(params, X)
    return {wid: rank_score(row)[1] for wid, row in zip(ids, probs)}


def test_split_pool(
    corpus: LabeledCorpus, test_indices: Sequence[int]
) -> tuple[list[QueryItem], list[int], np.ndarray | None]:
    """Query items, binary gold, and row indices for the held-out split."""
    items = [
        QueryItem.from_class(corpus.rows[i].warning.id, corpus.rows[i].target_class)
        for i in test_indices
    ]
    gold = [int(corpus.rows[i].is_actionable) for i in test_indices]
    return items, gold, None


def evaluate_model(
    trained: TrainedModel,
    corpus: LabeledCorpus,
    n_queries: int = 100,
    query_size: int = 10,
    ks: Sequence[int] = DEFAULT_KS,
    seed: int = 0,
) -> dict[str, MetricReport]:
    """Held-out detection report plus ranking report on sampled queries."""
    test_idx = trained.test_indices
    X_test = trained.embeddings[test_idx]
    gold = [int(corpus.rows[i].is_actionable) for i in test_idx]
    reports = {
        "detector": detector_report(
            trained.params, X_test, gold, trained.threshold,
            protocol={"split": "test", "n": len(test_idx)},
        )
    }
    if trained.params.stage is Stage.FULL:
        pool = [
            QueryItem.from_class(corpus.rows[i].warning.id, corpus.rows[i].target_class)
            for i in test_idx
        ]
        queries = build_queries(pool, n_queries, query_size, seed)
        ids = [corpus.rows[i].warning.id for i in test_idx]
        scores = ranking_scores(trained.params, X_test, ids)
        reports["ranking"] = ranking_report(
            queries, scores, ks, seed=seed,
            protocol={
                "n_queries": n_queries,
                "query_size": query_size,
                "gain_map": {c.value: g for c, g in DEFAULT_GAIN_MAP.items()},
            },
        )
    return reports
