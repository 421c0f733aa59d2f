"""warntriage: mine, weak-label, rank, and triage static-analysis warnings.

The pipeline, end to end:

    load_history -> mine -> label_corpus -> train_two_stage -> rank

plus an evaluation harness (nDCG/MRR over sampled queries) and an HTTP
triage service. See the demos/ directory for narrative walkthroughs.
"""

from warntriage.core import (
    CLASS_ORDER,
    ContractViolation,
    TriageError,
    Warning,
    WarningFingerprint,
    WarningType,
    WeakLabel,
    WeakLabelClass,
    aggregate_label,
    normalize_qualifier,
)
from warntriage.encoding import (
    DEFAULT_EMBED_DIM,
    EmbeddingVector,
    TokenChannels,
    channels_for,
    code_channel,
    embed,
    encode_warning,
    text_channel,
)
from warntriage.ingest import (
    CommitMeta,
    CorpusIntegrityError,
    DiffSet,
    RevisionAnalysis,
    SourceSnapshot,
    load_history,
    parse_report,
    parse_unified_diff,
    render_unified_diff,
)
from warntriage.metrics import (
    MetricReport,
    Query,
    QueryItem,
    build_queries,
    mrr,
    ndcg_at_k,
    precision_recall_f1,
)
from warntriage.mining import (
    MinedCorpus,
    Status,
    TrackedWarning,
    classify,
    fix_commit,
    mine,
    track,
)
from warntriage.model import (
    ModelParams,
    Prediction,
    RankedWarning,
    Stage,
    TrainingConfig,
    detector_forward,
    load_model,
    rank,
    rank_score,
    reranker_forward,
    save_model,
    train_detector,
    train_reranker,
    warm_start_reranker,
)
from warntriage.synthetic import generate_labeled_corpus
from warntriage.training import train_two_stage
from warntriage.weaklabel import (
    KeywordConfig,
    LabeledCorpus,
    LabeledWarning,
    extract_context_identifiers,
    label_corpus,
    semantic_score,
    structural_score,
)

__version__ = "0.1.0"
