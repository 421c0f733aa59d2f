#!/usr/bin/env python3
"""Builds the integration-test fixture: a trained model plus an analyzer
report of 1,100 synthetic warnings for the service to rank.

Usage: python3 make_fixture.py OUTDIR
"""

import json
import sys
from pathlib import Path

from warntriage.core import WeakLabelClass
from warntriage.ingest.report import DEFAULT_BUG_TYPE_MAP
from warntriage.model import TrainingConfig, save_model
from warntriage.synthetic import generate_labeled_corpus
from warntriage.training import train_two_stage

OUT = Path(sys.argv[1])
OUT.mkdir(parents=True, exist_ok=True)

COUNTS = {
    WeakLabelClass.VTB: 60,
    WeakLabelClass.LTB: 80,
    WeakLabelClass.UTB: 200,
    WeakLabelClass.FALSE_WARNING: 760,
}

corpus = generate_labeled_corpus(COUNTS, seed=12)
trained = train_two_stage(
    corpus,
    embed_dim=128,
    hidden_dim=8,
    cfg=TrainingConfig(seed=12, epochs=30, learning_rate=0.3),
    reranker_cfg=TrainingConfig(seed=12, epochs=30, learning_rate=0.3),
)
save_model(trained.params, OUT / "model.json", trained.metadata())

reverse_types = {wtype: code for code, wtype in DEFAULT_BUG_TYPE_MAP.items()}
records = [
    {
        "bug_type": reverse_types[row.warning.warning_type],
        "qualifier": row.warning.qualifier,
        "file": row.warning.file,
        "line": row.warning.line,
        "procedure": row.warning.procedure,
    }
    for row in corpus.rows
]
(OUT / "report.json").write_text(json.dumps(records))
print(json.dumps({"report_records": len(records)}))
