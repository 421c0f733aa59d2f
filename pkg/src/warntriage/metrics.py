"""Detection and ranking metrics with the 100-query evaluation protocol.

nDCG uses exponential gains (2^g - 1) over the graded classes 0..3; MRR
counts only AWHB items (gain >= 2) as relevant. Queries are fixed-size
samples drawn without replacement within a query and resampled until each
contains at least one AWHB.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from warntriage.core import ContractViolation, TriageError, WeakLabelClass

AWHB_GAIN_THRESHOLD = 2
DEFAULT_KS = (1, 3, 5)

# graded relevance per gold class; override via QueryItem.from_class(gain_map=...)
DEFAULT_GAIN_MAP: dict[WeakLabelClass, int] = {
    WeakLabelClass.FALSE_WARNING: 0,
    WeakLabelClass.UTB: 1,
    WeakLabelClass.LTB: 2,
    WeakLabelClass.VTB: 3,
}


class EvalError(TriageError):
    """The evaluation protocol cannot run on this corpus."""


@dataclass(frozen=True)
class QueryItem:
    warning_id: str
    gain: int  # 0..3, the gold class's base score

    def __post_init__(self) -> None:
        if self.gain not in (0, 1, 2, 3):
            raise ContractViolation(f"gain must be in 0..3, got {self.gain}")

    @property
    def is_awhb(self) -> bool:
        return self.gain >= AWHB_GAIN_THRESHOLD

    @classmethod
    def from_class(
        cls,
        warning_id: str,
        label: WeakLabelClass,
        gain_map: dict[WeakLabelClass, int] | None = None,
    ) -> "QueryItem":
        gains = DEFAULT_GAIN_MAP if gain_map is None else gain_map
        return cls(warning_id=warning_id, gain=gains[label])


@dataclass(frozen=True)
class Query:
    id: str
    items: tuple[QueryItem, ...]  # in ranked order once a ranker has run

    def gains(self) -> list[int]:
        return [item.gain for item in self.items]

    def first_awhb_rank(self) -> int | None:
        for position, item in enumerate(self.items, 1):
            if item.is_awhb:
                return position
        return None


def precision_recall_f1(
    predictions: Sequence[int], gold: Sequence[int]
) -> tuple[float, float, float]:
    """Binary detection metrics; 0 where a denominator vanishes."""
    if len(predictions) != len(gold):
        raise ContractViolation("predictions and gold must have equal length")
    if not any(gold):
        raise EvalError("gold labels contain no positives")
    tp = sum(1 for p, g in zip(predictions, gold) if p and g)
    fp = sum(1 for p, g in zip(predictions, gold) if p and not g)
    fn = sum(1 for p, g in zip(predictions, gold) if not p and g)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _dcg(gains: Sequence[int], k: int) -> float:
    return sum(
        (2**g - 1) / math.log2(i + 1) for i, g in enumerate(gains[:k], 1)
    )


def ndcg_at_k(gains: Sequence[int], k: int) -> float:
    """Normalized discounted cumulative gain over the top k of a ranking."""
    if k < 1:
        raise ContractViolation("k must be >= 1")
    ideal = _dcg(sorted(gains, reverse=True), k)
    if ideal == 0.0:
        return 0.0
    return _dcg(gains, k) / ideal


def mrr(queries: Sequence[Query]) -> float:
    """Mean reciprocal rank of the first AWHB; AWHB-free queries count 0."""
    if not queries:
        raise ContractViolation("mrr needs at least one query")
    total = 0.0
    for query in queries:
        rank = query.first_awhb_rank()
        if rank is not None:
            total += 1.0 / rank
    return total / len(queries)


def build_queries(
    pool: Sequence[QueryItem],
    n_queries: int = 100,
    query_size: int = 10,
    seed: int = 0,
    max_resamples: int = 1000,
) -> list[Query]:
    """Sample fixed-size queries: without replacement within a query, with
    replacement across queries, rejecting AWHB-free draws."""
    if len(pool) < query_size:
        raise EvalError(
            f"corpus of {len(pool)} warnings is smaller than the query size {query_size}"
        )
    if not any(item.is_awhb for item in pool):
        raise EvalError("corpus contains no AWHB; ranking queries cannot be built")
    rng = np.random.default_rng(seed)
    queries = []
    for q in range(n_queries):
        for _ in range(max_resamples):
            picked = rng.choice(len(pool), size=query_size, replace=False)
            items = tuple(pool[i] for i in picked)
            if any(item.is_awhb for item in items):
                queries.append(Query(id=f"q{q:03d}", items=items))
                break
        else:
            raise EvalError(
                f"could not sample an AWHB-bearing query in {max_resamples} attempts"
            )
    return queries


def rank_query(query: Query, score_by_id: dict[str, float]) -> Query:
    """Reorder a query by descending score, stable on ties."""
    ordered = sorted(query.items, key=lambda item: -score_by_id[item.warning_id])
    return Query(id=query.id, items=tuple(ordered))


def shuffle_query(query: Query, rng: np.random.Generator) -> Query:
    order = rng.permutation(len(query.items))
    return Query(id=query.id, items=tuple(query.items[i] for i in order))


@dataclass
class MetricReport:
    """Detection and/or ranking results plus the protocol that produced them."""

    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    ndcg: dict[int, float] = field(default_factory=dict)
    mrr: float | None = None
    per_query: list[dict[str, Any]] = field(default_factory=list)
    seed: int | None = None
    protocol: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "ndcg": {str(k): v for k, v in self.ndcg.items()},
            "mrr": self.mrr,
            "per_query": self.per_query,
            "seed": self.seed,
            "protocol": self.protocol,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def evaluate_ranked_queries(
    queries: Sequence[Query], ks: Sequence[int] = DEFAULT_KS
) -> tuple[dict[int, float], float, list[dict[str, Any]]]:
    """Mean nDCG@k for each k, MRR, and the per-query breakdown."""
    per_query = []
    for query in queries:
        gains = query.gains()
        per_query.append(
            {
                "query_id": query.id,
                "ndcg": {str(k): ndcg_at_k(gains, k) for k in ks},
                "first_awhb_rank": query.first_awhb_rank(),
            }
        )
    means = {
        k: sum(entry["ndcg"][str(k)] for entry in per_query) / len(per_query) for k in ks
    }
    return means, mrr(queries), per_query


def ranking_report(
    queries: Sequence[Query],
    scorer: Callable[[str], float] | dict[str, float],
    ks: Sequence[int] = DEFAULT_KS,
    seed: int | None = None,
    protocol: dict[str, Any] | None = None,
) -> MetricReport:
    score_by_id = scorer if isinstance(scorer, dict) else {
        item.warning_id: scorer(item.warning_id) for q in queries for item in q.items
    }
    ranked = [rank_query(q, score_by_id) for q in queries]
    ndcg_means, mean_rr, per_query = evaluate_ranked_queries(ranked, ks)
    return MetricReport(
        ndcg=ndcg_means, mrr=mean_rr, per_query=per_query, seed=seed, protocol=protocol or {}
    )


def random_ranking_report(
    queries: Sequence[Query],
    ks: Sequence[int] = DEFAULT_KS,
    seed: int = 0,
    protocol: dict[str, Any] | None = None,
) -> MetricReport:
    rng = np.random.default_rng([seed, 0xB45E])
    ranked = [shuffle_query(q, rng) for q in queries]
    ndcg_means, mean_rr, per_query = evaluate_ranked_queries(ranked, ks)
    return MetricReport(
        ndcg=ndcg_means, mrr=mean_rr, per_query=per_query, seed=seed,
        protocol=dict(protocol or {}, ranker="random"),
    )


def random_selector_predictions(
    n: int, positive_ratio: float, seed: int = 0
) -> list[int]:
    """Random-selection detection baseline: flip a coin biased by the
    training-set positive ratio."""
    rng = np.random.default_rng([seed, 0x5E1])
    return [int(v) for v in rng.random(n) < positive_ratio]


def render_tables(reports: dict[str, MetricReport], ks: Sequence[int] = DEFAULT_KS) -> str:
    """Aligned text tables: detection metrics, then recommendation metrics."""
    lines = []
    det = {name: r for name, r in reports.items() if r.precision is not None}
    if det:
        lines.append(f"{'Measure':<20}{'Precision':>10}{'Recall':>10}{'F1-score':>10}")
        for name, r in det.items():
            lines.append(f"{name:<20}{r.precision:>10.3f}{r.recall:>10.3f}{r.f1:>10.3f}")
        lines.append("")
    rec = {name: r for name, r in reports.items() if r.mrr is not None}
    if rec:
        header = f"{'Measure':<20}" + "".join(f"{f'nDCG@{k}':>10}" for k in ks) + f"{'MRR':>10}"
        lines.append(header)
        for name, r in rec.items():
            row = f"{name:<20}" + "".join(f"{r.ndcg[k]:>10.3f}" for k in ks) + f"{r.mrr:>10.3f}"
            lines.append(row)
    return "\n".join(lines) + "\n"
