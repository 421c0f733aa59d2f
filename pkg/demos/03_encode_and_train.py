#!/usr/bin/env python3
"""Encoding warnings and training the two-stage model.

Warnings become fixed-width vectors by feature-hashing two token channels
(report text into the lower half, source context into the upper half).
The detector learns actionable-vs-false on those vectors; the reranker is
then warm-started from the detector's body and fine-tuned on the four
weak-label classes.
"""

import numpy as np

from warntriage import TrainingConfig, channels_for, embed, generate_labeled_corpus
from warntriage.model import detector_forward_batch
from warntriage.training import evaluate_model, train_two_stage

corpus = generate_labeled_corpus(seed=0)
print(f"synthetic corpus: {len(corpus)} warnings, tally {corpus.tally}")

row = corpus.rows[0]
channels = channels_for(row.warning, code_lines=list(row.code_context))
print(f"\nfirst warning: {row.warning.qualifier!r}")
print(f"  text tokens ({len(channels.text_tokens)}): {channels.text_tokens[:8]} ...")
print(f"  code tokens ({len(channels.code_tokens)}): {channels.code_tokens[:8]} ...")
vec = embed(channels, dim=1024)
print(f"  embedded into {vec.dim} slots, norm {vec.norm:.6f}, "
      f"{int(np.count_nonzero(vec.values))} nonzero")

print("\ntraining detector (200 epochs) then warm-started reranker (40 epochs)...")
trained = train_two_stage(
    corpus,
    embed_dim=1024,
    hidden_dim=64,
    cfg=TrainingConfig(seed=0, epochs=200),
    reranker_cfg=TrainingConfig(seed=0, epochs=40),
)
det_trace = trained.detector_run.loss_trace
rr_trace = trained.reranker_run.loss_trace
print(f"detector loss {det_trace[0]:.4f} -> {det_trace[-1]:.4f} over {len(det_trace)} epochs")
print(f"reranker loss {rr_trace[0]:.4f} -> {rr_trace[-1]:.4f} over {len(rr_trace)} epochs")

test_idx = trained.test_indices
probs = detector_forward_batch(trained.params, trained.embeddings[test_idx])
print(f"\nheld-out split: {len(test_idx)} warnings, "
      f"mean P(actionable) {probs.mean():.3f}")

reports = evaluate_model(trained, corpus, seed=0)
det = reports["detector"]
print(f"held-out detection: precision={det.precision:.3f} recall={det.recall:.3f} f1={det.f1:.3f}")
