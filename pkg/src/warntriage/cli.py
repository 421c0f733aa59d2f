"""Command-line surface: mine, label, train, rank, eval, serve.

Exit codes: 0 success, 1 usage error, 2 data/contract error. Defaults for
selected flags can come from a JSON file named by the ACW_CONFIG env var.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from warntriage.core import TriageError
from warntriage.encoding import DEFAULT_EMBED_DIM
from warntriage.ingest.history import SourceSnapshot, load_history
from warntriage.ingest.report import load_bug_type_map, parse_report
from warntriage.metrics import (
    DEFAULT_GAIN_MAP,
    MetricReport,
    QueryItem,
    build_queries,
    precision_recall_f1,
    random_ranking_report,
    random_selector_predictions,
    ranking_report,
    render_tables,
)
from warntriage.mining import MinedCorpus, mine
from warntriage.model import (
    DEFAULT_HIDDEN_DIM,
    Stage,
    TrainingConfig,
    load_model,
    rank,
    save_model,
)
from warntriage.service import TriageSession, make_server
from warntriage.training import (
    corpus_digest,
    detector_report,
    encode_corpus,
    evaluate_model,
    ranking_scores,
    train_two_stage,
)
from warntriage.weaklabel import KeywordConfig, LabeledCorpus, label_corpus

# flags that may take their default from the ACW_CONFIG file
_CONFIG_KEYS = (
    "embed_dim",
    "hidden_dim",
    "seed",
    "epochs",
    "keywords",
    "analyzer_cmd",
    "type_map",
    "threshold",
)


def _env_defaults() -> dict:
    path = os.environ.get("ACW_CONFIG")
    if not path:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise TriageError(f"ACW_CONFIG file {path}: {exc}") from None
    return {k: v for k, v in raw.items() if k in _CONFIG_KEYS}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this surface reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _type_map(args):
    return load_bug_type_map(args.type_map) if getattr(args, "type_map", None) else None


def _load_revisions(args, source, mode):
    return load_history(
        source,
        mode=mode,
        limit=getattr(args, "limit", None),
        analyzer_cmd=getattr(args, "analyzer_cmd", None),
        reports_dir=getattr(args, "reports_dir", None),
        type_map=_type_map(args),
    )


def cmd_mine(args) -> int:
    revisions = _load_revisions(args, args.source, args.mode)
    now = args.now if args.now is not None else int(time.time())
    corpus = mine(revisions, now=now, source_id=str(args.source))
    corpus.save(args.out)
    counts = corpus.counts
    print(
        f"mined {len(corpus.tracked)} episodes from {len(revisions)} revisions: "
        f"actionable={counts['actionable']} false_alarm={counts['false_alarm']} "
        f"undecided={counts['undecided']}"
    )
    print(f"wrote {args.out}")
    return 0


def cmd_label(args) -> int:
    corpus = MinedCorpus.load(args.corpus)
    revisions = _load_revisions(args, args.source, args.mode)
    cfg = KeywordConfig.load(args.keywords) if args.keywords else KeywordConfig()
    labeled = label_corpus(corpus, revisions, cfg)
    labeled.save(args.out)
    tally = labeled.tally
    print(
        f"labeled {len(labeled)} warnings: VTB={tally['VTB']} LTB={tally['LTB']} "
        f"UTB={tally['UTB']} false_warning={tally['false_warning']}"
    )
    print(f"wrote {args.out}")
    return 0


def cmd_train(args) -> int:
    text = Path(args.labeled).read_text(encoding="utf-8")
    corpus = LabeledCorpus.from_jsonl(text)
    cfg = TrainingConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        class_weighting=args.class_weighting,
        seed=args.seed,
    )
    reranker_cfg = None
    if args.reranker_epochs is not None:
        reranker_cfg = TrainingConfig(
            learning_rate=args.lr,
            epochs=args.reranker_epochs,
            batch_size=args.batch_size,
            class_weighting=args.class_weighting,
            seed=args.seed,
        )
    stage = "both" if args.stage == "both" else "detector"
    trained = train_two_stage(
        corpus,
        embed_dim=args.embed_dim,
        hidden_dim=args.hidden,
        cfg=cfg,
        reranker_cfg=reranker_cfg,
        stage=stage,
        extra_metadata={"corpus_digest": corpus_digest(text), "corpus_rows": len(corpus)},
    )
    trained.threshold = args.threshold
    save_model(trained.params, args.out, trained.metadata())

    reports = {}
    try:
        reports = evaluate_model(trained, corpus, seed=cfg.seed)
    except TriageError as exc:
        print(f"held-out ranking metrics skipped: {exc}", file=sys.stderr)
    metrics_out = args.metrics_out or f"{args.out}.metrics.json"
    doc = {name: r.to_dict() for name, r in reports.items()}
    Path(metrics_out).write_text(
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
    )
    print(f"trained stage={trained.params.stage.value} model -> {args.out}")
    if reports:
        print(render_tables({k: v for k, v in reports.items()}), end="")
    print(f"wrote {metrics_out}")
    return 0


def _ranked_from_report(args, params):
    report_bytes = Path(args.report).read_bytes()
    parsed = parse_report(report_bytes, revision_index=0, type_map=_type_map(args))
    snapshot = SourceSnapshot.from_dir(args.sources) if args.sources else None
    ranked = rank(parsed.warnings, snapshot, params)
    return parsed, snapshot, ranked


def cmd_rank(args) -> int:
    params, _meta = load_model(args.model)
    parsed, _snapshot, ranked = _ranked_from_report(args, params)
    doc = {
        "model_digest": _file_digest(args.model),
        "skipped_records": parsed.skipped,
        "warnings": [
            {
                **r.warning.to_dict(),
                "predicted_class": r.prediction.predicted_class.value,
                "class_probs": list(r.prediction.class_probs),
                "detector_prob": r.prediction.detector_prob,
                "score": r.prediction.score,
                "band": r.band,
            }
            for r in ranked
        ],
    }
    Path(args.out).write_text(
        json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    bands = {"red": 0, "orange": 0, "none": 0}
    for r in ranked:
        bands[r.band] += 1
    print(
        f"ranked {len(ranked)} warnings ({parsed.skipped} skipped): "
        f"red={bands['red']} orange={bands['orange']} plain={bands['none']}"
    )
    print(f"wrote {args.out}")
    return 0


def cmd_eval(args) -> int:
    params, meta = load_model(args.model)
    if params.stage is not Stage.FULL:
        raise TriageError("evaluation needs a full-stage model (train with --stage both)")
    text = Path(args.labeled).read_text(encoding="utf-8")
    corpus = LabeledCorpus.from_jsonl(text)
    recorded = meta.get("corpus_digest")
    if recorded and recorded != corpus_digest(text):
        raise TriageError(
            "labeled corpus does not match the corpus this model was trained on "
            "(digest mismatch); the persisted split indices would be meaningless"
        )
    split = meta.get("split", {})
    test_idx = split.get("test")
    if not test_idx:
        raise TriageError("model file carries no held-out split indices")

    ks = tuple(int(k) for k in args.k.split(","))
    test_rows = [corpus.rows[i] for i in test_idx]
    X_test = encode_corpus(test_rows, params.embed_dim)
    ids = [row.warning.id for row in test_rows]
    gold = [int(row.is_actionable) for row in test_rows]
    pool = [QueryItem.from_class(row.warning.id, row.target_class) for row in test_rows]
    queries = build_queries(pool, args.queries, args.query_size, seed=args.seed)
    protocol = {
        "n_queries": args.queries,
        "query_size": args.query_size,
        "k": list(ks),
        "gain_map": {c.value: g for c, g in DEFAULT_GAIN_MAP.items()},
    }

    model_report = ranking_report(
        queries, ranking_scores(params, X_test, ids), ks, seed=args.seed, protocol=protocol
    )
    det = detector_report(
        params, X_test, gold, threshold=meta.get("threshold", 0.5),
        protocol={"split": "test"},
    )
    model_report.precision, model_report.recall, model_report.f1 = (
        det.precision, det.recall, det.f1,
    )

    random_report = random_ranking_report(queries, ks, seed=args.seed, protocol=protocol)
    train_idx = split.get("train", [])
    ratio = (
        sum(int(corpus.rows[i].is_actionable) for i in train_idx) / len(train_idx)
        if train_idx
        else 0.5
    )
    rand_preds = random_selector_predictions(len(gold), ratio, seed=args.seed)
    random_report.precision, random_report.recall, random_report.f1 = precision_recall_f1(
        rand_preds, gold
    )

    reports = {"model": model_report, "random": random_report}
    print(render_tables(reports, ks), end="")
    if args.out:
        doc = {name: r.to_dict() for name, r in reports.items()}
        Path(args.out).write_text(
            json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
        )
        print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    params, _meta = load_model(args.model)
    parsed, snapshot, ranked = _ranked_from_report(args, params)
    session = TriageSession(
        ranked,
        snapshot,
        state_path=args.state,
        model_digest=_file_digest(args.model),
        report_digest=hashlib.sha256(Path(args.report).read_bytes()).hexdigest(),
    )
    try:
        server = make_server(session, host=args.host, port=args.port, ui_dir=args.ui_dir)
    except OSError as exc:
        raise TriageError(f"cannot bind {args.host}:{args.port}: {exc}") from None
    print(
        f"serving {len(ranked)} ranked warnings on http://{args.host}:{server.server_address[1]}/ "
        f"({parsed.skipped} records skipped)"
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> _Parser:
    cfg = _env_defaults()
    parser = _Parser(prog="warntriage", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine warning lifecycles from a revision history")
    p.add_argument("--source", required=True, help="fixture directory or git working copy")
    p.add_argument("--mode", choices=("git", "fixture"), default="fixture")
    p.add_argument("--limit", type=int, default=None, help="use only the most recent N revisions")
    p.add_argument("--out", required=True, help="mined corpus JSONL path")
    p.add_argument("--now", type=int, default=None,
                   help="unix timestamp for the two-year clock (default: wall clock)")
    p.add_argument("--reports-dir", default=None, help="pre-generated report files (git mode)")
    p.add_argument("--analyzer-cmd", default=cfg.get("analyzer_cmd"),
                   help="analyzer command template with {checkout_dir} and {out_file} (git mode)")
    p.add_argument("--type-map", default=cfg.get("type_map"), help="bug-type mapping JSON file")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("label", help="weak-label a mined corpus against its fix commits")
    p.add_argument("--corpus", required=True, help="mined corpus JSONL")
    p.add_argument("--source", required=True, help="the history the corpus was mined from")
    p.add_argument("--mode", choices=("git", "fixture"), default="fixture")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--reports-dir", default=None)
    p.add_argument("--analyzer-cmd", default=cfg.get("analyzer_cmd"))
    p.add_argument("--keywords", default=cfg.get("keywords"), help="keyword config JSON file")
    p.add_argument("--type-map", default=cfg.get("type_map"))
    p.add_argument("--out", required=True, help="labeled corpus JSONL path")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train", help="train the two-stage model on a labeled corpus")
    p.add_argument("--labeled", required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--embed-dim", type=int, default=cfg.get("embed_dim", DEFAULT_EMBED_DIM))
    p.add_argument("--hidden", type=int, default=cfg.get("hidden_dim", DEFAULT_HIDDEN_DIM))
    p.add_argument("--seed", type=int, default=cfg.get("seed", 0))
    p.add_argument("--epochs", type=int, default=cfg.get("epochs", 200))
    p.add_argument("--reranker-epochs", type=int, default=None,
                   help="fine-tuning epochs (default: same as --epochs)")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--class-weighting", choices=("none", "inverse_frequency"),
                   default="inverse_frequency")
    p.add_argument("--threshold", type=float, default=cfg.get("threshold", 0.5))
    p.add_argument("--stage", choices=("both", "detector"), default="both")
    p.add_argument("--metrics-out", default=None,
                   help="held-out metrics JSON (default: <out>.metrics.json)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rank", help="rank a report's warnings with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--report", required=True, help="analyzer report JSON")
    p.add_argument("--sources", default=None, help="source tree for code context")
    p.add_argument("--type-map", default=cfg.get("type_map"))
    p.add_argument("--out", required=True, help="ranked output JSON path")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="evaluate ranking quality on the held-out split")
    p.add_argument("--model", required=True)
    p.add_argument("--labeled", required=True)
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--query-size", type=int, default=10)
    p.add_argument("--k", default="1,3,5", help="comma-separated nDCG cutoffs")
    p.add_argument("--seed", type=int, default=cfg.get("seed", 0))
    p.add_argument("--out", default=None, help="metrics JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="serve the triage UI and API for a ranked report")
    p.add_argument("--model", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--sources", default=None)
    p.add_argument("--type-map", default=cfg.get("type_map"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--state", default=None, help="judgment persistence JSON file")
    p.add_argument("--ui-dir", default=None, help="static triage UI bundle to mount at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except TriageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
