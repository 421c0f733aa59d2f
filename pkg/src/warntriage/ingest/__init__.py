from warntriage.ingest.diff import (
    DEV_NULL,
    DiffLine,
    DiffParseError,
    DiffSet,
    FileDiff,
    Hunk,
    parse_unified_diff,
    render_unified_diff,
)
from warntriage.ingest.history import (
    CommitMeta,
    CorpusIntegrityError,
    RevisionAnalysis,
    SourceSnapshot,
    load_history,
)
from warntriage.ingest.report import (
    DEFAULT_BUG_TYPE_MAP,
    ParsedReport,
    ReportError,
    load_bug_type_map,
    parse_report,
)

__all__ = [
    "DEV_NULL",
    "DEFAULT_BUG_TYPE_MAP",
    "CommitMeta",
    "CorpusIntegrityError",
    "DiffLine",
    "DiffParseError",
    "DiffSet",
    "FileDiff",
    "Hunk",
    "ParsedReport",
    "ReportError",
    "RevisionAnalysis",
    "SourceSnapshot",
    "load_bug_type_map",
    "load_history",
    "parse_report",
    "parse_unified_diff",
    "render_unified_diff",
]
