#!/usr/bin/env python3
"""Ranking quality: nDCG@K and MRR over sampled triage queries.

Queries are fixed-size samples of the held-out split, each guaranteed to
contain at least one warning worth finding (VTB or LTB). The model's
ranking score is the predicted class's 0..3 base score nudged by its
probability, so the comparison against a random ranking is apples to
apples: same queries, different order.
"""

from warntriage import TrainingConfig, build_queries, generate_labeled_corpus
from warntriage.metrics import QueryItem, random_ranking_report, ranking_report, render_tables
from warntriage.training import ranking_scores, train_two_stage

corpus = generate_labeled_corpus(seed=1)
trained = train_two_stage(
    corpus,
    embed_dim=1024,
    hidden_dim=64,
    cfg=TrainingConfig(seed=1, epochs=200),
    reranker_cfg=TrainingConfig(seed=1, epochs=40),
)

test_idx = trained.test_indices
rows = [corpus.rows[i] for i in test_idx]
pool = [QueryItem.from_class(r.warning.id, r.target_class) for r in rows]
print(f"held-out pool: {len(pool)} warnings, {sum(i.is_awhb for i in pool)} AWHB")

queries = build_queries(pool, n_queries=100, query_size=10, seed=1)
print(f"built {len(queries)} queries of {len(queries[0].items)} warnings each")

scores = ranking_scores(trained.params, trained.embeddings[test_idx], [r.warning.id for r in rows])
model_report = ranking_report(queries, scores, seed=1)
random_report = random_ranking_report(queries, seed=1)

print()
print(render_tables({"model": model_report, "random": random_report}), end="")

first_ranks = [e["first_awhb_rank"] for e in model_report.per_query]
print(f"\nmodel puts the first real find at mean rank "
      f"{sum(first_ranks) / len(first_ranks):.2f} of 10")
