"""Weak labeling rules.

A fixed warning earns a semantic score from its fix commit's message and a
structural score from the fix diff, which aggregate into VTB/LTB/UTB.
Keyword lists are closed (reproducibility) but overridable via a config
file with one section per warning type.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from warntriage.core import (
    TriageError,
    Warning,
    WarningType,
    WeakLabel,
    WeakLabelClass,
)
from warntriage.encoding import code_context_lines
from warntriage.ingest.diff import DiffSet
from warntriage.ingest.history import RevisionAnalysis
from warntriage.mining import MinedCorpus, Status, fix_commit

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_Q = r"[`'\"]?"

# Qualifier templates, one per warning type; identifier groups keep their case.
_QUALIFIER_PATTERNS: dict[WarningType, re.Pattern] = {
    WarningType.UNINITIALIZED_VARIABLE: re.compile(
        rf"value read from\s+{_Q}({_IDENT}){_Q}\s+was never initialized", re.IGNORECASE
    ),
    WarningType.NULL_DEREFERENCE: re.compile(
        rf"{_Q}({_IDENT}){_Q}\s+last assigned on line", re.IGNORECASE
    ),
    WarningType.RESOURCE_LEAK: re.compile(
        rf"acquired (?:to|by)\s+{_Q}({_IDENT}){_Q}(?:\(\))?{_Q}\s+by call to\s+{_Q}({_IDENT})",
        re.IGNORECASE,
    ),
    WarningType.DEAD_STORE: re.compile(
        rf"value written to\s+{_Q}({_IDENT}){_Q}\s+is never used", re.IGNORECASE
    ),
}


@dataclass(frozen=True)
class ContextIdentifiers:
    variable: str | None = None
    pointer: str | None = None
    function: str | None = None

    def present(self) -> list[str]:
        return [i for i in (self.variable, self.pointer, self.function) if i]


def extract_context_identifiers(warning: Warning) -> ContextIdentifiers:
    """Pull the variable/pointer/function names out of the qualifier text.

    Degrades to all-absent when the qualifier matches no template.
    """
    match = _QUALIFIER_PATTERNS[warning.warning_type].search(warning.qualifier)
    if match is None:
        return ContextIdentifiers()
    if warning.warning_type is WarningType.NULL_DEREFERENCE:
        return ContextIdentifiers(pointer=match.group(1))
    if warning.warning_type is WarningType.RESOURCE_LEAK:
        return ContextIdentifiers(variable=match.group(1), function=match.group(2))
    return ContextIdentifiers(variable=match.group(1))


DEFAULT_TYPE_KEYWORDS: dict[WarningType, tuple[str, ...]] = {
    WarningType.UNINITIALIZED_VARIABLE: (
        "initial",
        "initialize",
        "initialized",
        "initialization",
        "uninitialized",
        "define",
        "defined",
        "definition",
        "assign",
        "assigned",
        "assignment",
    ),
    WarningType.NULL_DEREFERENCE: (
        "null dereference",
        "null deref",
        "null pointer",
        "nullptr",
        "null check",
    ),
    WarningType.RESOURCE_LEAK: ("resource", "leak", "leaks", "leaked", "leakage"),
    WarningType.DEAD_STORE: ("dead store", "dead code", "unused", "never"),
}

DEFAULT_COMMON_KEYWORDS: tuple[str, ...] = (
    "fix",
    "repair",
    "bug",
    "warning",
    "solve",
    "problem",
    "error",
    "issue",
    "crash",
    "leak",
)

DEFAULT_RESOURCE_FREE_FUNCTIONS: tuple[str, ...] = (
    "free",
    "fclose",
    "close",
    "closedir",
    "pclose",
    "munmap",
)


@dataclass(frozen=True)
class KeywordConfig:
    type_keywords: dict[WarningType, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_TYPE_KEYWORDS)
    )
    common_keywords: tuple[str, ...] = DEFAULT_COMMON_KEYWORDS
    resource_free_functions: tuple[str, ...] = DEFAULT_RESOURCE_FREE_FUNCTIONS

    def __post_init__(self) -> None:
        for wtype in WarningType:
            words = self.type_keywords.get(wtype)
            if not words:
                raise TriageError(f"keyword config: no type keywords for {wtype.value}")
            _require_lowercase(words, f"type keywords for {wtype.value}")
        if not self.common_keywords:
            raise TriageError("keyword config: common keyword list is empty")
        _require_lowercase(self.common_keywords, "common keywords")
        if not self.resource_free_functions:
            raise TriageError("keyword config: resource-free function list is empty")

    @classmethod
    def load(cls, path: str | Path) -> "KeywordConfig":
        """Read the overrides file; anything omitted keeps its default."""
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise TriageError(f"keyword config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise TriageError(f"keyword config {path}: expected a JSON object")
        type_keywords = dict(DEFAULT_TYPE_KEYWORDS)
        resource_free = DEFAULT_RESOURCE_FREE_FUNCTIONS
        sections = raw.get("types", {})
        if not isinstance(sections, dict):
            raise TriageError(f"keyword config {path}: 'types' must be an object")
        for name, section in sections.items():
            try:
                wtype = WarningType(name)
            except ValueError:
                raise TriageError(f"keyword config {path}: unknown warning type {name!r}") from None
            if "type_keywords" in section:
                type_keywords[wtype] = tuple(section["type_keywords"])
            if wtype is WarningType.RESOURCE_LEAK and "resource_free_functions" in section:
                resource_free = tuple(section["resource_free_functions"])
        common = tuple(raw.get("common_keywords", DEFAULT_COMMON_KEYWORDS))
        return cls(
            type_keywords=type_keywords,
            common_keywords=common,
            resource_free_functions=resource_free,
        )


def _require_lowercase(words, what: str) -> None:
    for w in words:
        if not w or w != w.lower():
            raise TriageError(f"keyword config: {what} must be lowercase and non-empty, got {w!r}")


_LOWER_TOKEN = re.compile(r"[a-z0-9_]+")
_CASED_TOKEN = re.compile(r"[A-Za-z0-9_]+")


def _phrase(keyword: str) -> tuple[str, ...]:
    return tuple(_LOWER_TOKEN.findall(keyword.lower()))


def _contains_phrase(tokens: list[str], phrase: tuple[str, ...]) -> bool:
    if not phrase:
        return False
    span = len(phrase)
    for i in range(len(tokens) - span + 1):
        if tuple(tokens[i : i + span]) == phrase:
            return True
    return False


def semantic_score(
    message: str,
    warning: Warning,
    ids: ContextIdentifiers,
    cfg: KeywordConfig | None = None,
) -> int:
    """Commit-message tier: 3 type keyword, 2 context identifier, 1 common
    keyword, 0 nothing. Tiers use max semantics."""
    cfg = cfg or KeywordConfig()
    lower_tokens = _LOWER_TOKEN.findall(message.lower())
    if any(_contains_phrase(lower_tokens, _phrase(k)) for k in cfg.type_keywords[warning.warning_type]):
        return 3
    cased_tokens = set(_CASED_TOKEN.findall(message))
    if any(ident in cased_tokens for ident in ids.present()):
        return 2
    if any(_contains_phrase(lower_tokens, _phrase(k)) for k in cfg.common_keywords):
        return 1
    return 0


def _ident_re(name: str) -> str:
    return rf"\b{re.escape(name)}\b"


def _has_assignment(text: str, var: str) -> bool:
    # var followed by '=' but not '=='
    return re.search(rf"\b{re.escape(var)}\s*=(?!=)", text) is not None


def _has_address_arg(text: str, var: str) -> bool:
    return "(" in text and re.search(rf"&\s*{re.escape(var)}\b", text) is not None


def _has_null_check(text: str, ptr: str) -> bool:
    p = re.escape(ptr)
    if re.search(r"\bif\b", text) is None:
        return False
    checks = (
        rf"\b{p}\s*[!=]=\s*(?:NULL|null)\b",
        rf"\b(?:NULL|null)\s*[!=]=\s*{p}\b",
        rf"!\s*{p}\b",
    )
    return any(re.search(c, text) for c in checks)


def _has_use(text: str, var: str) -> bool:
    # any occurrence that is not a plain assignment target ('==' is a use)
    for m in re.finditer(rf"\b{re.escape(var)}\b", text):
        rest = text[m.end():].lstrip()
        if rest.startswith("=") and not rest.startswith("=="):
            continue
        return True
    return False


def _free_call_with_arg(text: str, functions: tuple[str, ...], var: str) -> bool:
    for fn in functions:
        for m in re.finditer(rf"\b{re.escape(fn)}\s*\(([^)]*)\)", text):
            if re.search(_ident_re(var), m.group(1)):
                return True
    return False


def structural_score(
    diff: DiffSet,
    warning: Warning,
    ids: ContextIdentifiers,
    cfg: KeywordConfig | None = None,
) -> int:
    """Fix-diff tier: 3 when the per-type fix pattern matches, 1 when the
    change merely lands in the expected scope, 0 otherwise.

    Added lines use new-file numbering, removed lines old-file numbering;
    the warning line refers to the pre-fix revision and is compared as-is.
    """
    cfg = cfg or KeywordConfig()
    hunks = diff.hunks_for(warning.file)
    if not hunks:
        return 0
    added: list[tuple[int, str]] = []
    removed: list[tuple[int, str]] = []
    for hunk in hunks:
        added.extend(hunk.added_lines())
        removed.extend(hunk.removed_lines())

    wtype = warning.warning_type
    line = warning.line
    before = wtype in (WarningType.UNINITIALIZED_VARIABLE, WarningType.NULL_DEREFERENCE)

    if _fix_pattern_matches(wtype, line, added, removed, ids, cfg):
        return 3

    if before:
        in_scope = any(no <= line for no, _ in added) or any(no <= line for no, _ in removed)
    else:
        in_scope = any(no >= line for no, _ in added) or any(no >= line for no, _ in removed)
    return 1 if in_scope else 0


def _fix_pattern_matches(
    wtype: WarningType,
    line: int,
    added: list[tuple[int, str]],
    removed: list[tuple[int, str]],
    ids: ContextIdentifiers,
    cfg: KeywordConfig,
) -> bool:
    if wtype is WarningType.UNINITIALIZED_VARIABLE:
        var = ids.variable
        if not var:
            return False
        return any(
            no <= line and (_has_assignment(text, var) or _has_address_arg(text, var))
            for no, text in added
        )
    if wtype is WarningType.NULL_DEREFERENCE:
        ptr = ids.pointer
        if not ptr:
            return False
        return any(no <= line and _has_null_check(text, ptr) for no, text in added)
    if wtype is WarningType.RESOURCE_LEAK:
        var = ids.variable
        if not var:
            return False
        return any(
            no >= line and _free_call_with_arg(text, cfg.resource_free_functions, var)
            for no, text in added
        )
    if wtype is WarningType.DEAD_STORE:
        if any(no == line for no, _ in removed):
            return True
        var = ids.variable
        if not var:
            return False
        return any(no >= line and _has_use(text, var) for no, text in added)
    return False


@dataclass(frozen=True)
class LabeledWarning:
    """One corpus row ready for training: a warning plus its label."""

    warning: Warning
    status: str  # "actionable" | "false_warning"
    label: WeakLabel | None = None  # present for rule-labeled actionable rows
    aggregated: WeakLabelClass | None = None
    code_context: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.status not in ("actionable", "false_warning"):
            raise TriageError(f"unknown labeled status {self.status!r}")
        if self.label is not None and self.aggregated is None:
            object.__setattr__(self, "aggregated", self.label.aggregated)
        if self.status == "actionable":
            if self.aggregated is None or self.aggregated is WeakLabelClass.FALSE_WARNING:
                raise TriageError("actionable rows need an aggregated class in {VTB,LTB,UTB}")
        elif self.aggregated is not None:
            raise TriageError("false-warning rows carry no aggregated class")

    @property
    def is_actionable(self) -> bool:
        return self.status == "actionable"

    @property
    def target_class(self) -> WeakLabelClass:
        return self.aggregated if self.is_actionable else WeakLabelClass.FALSE_WARNING

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "warning": self.warning.to_dict(),
            "status": self.status,
            "cm": self.label.cm if self.label else None,
            "cc": self.label.cc if self.label else None,
            "aggregated": self.aggregated.value if self.aggregated else None,
        }
        if self.code_context:
            doc["code_context"] = list(self.code_context)
        return doc

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "LabeledWarning":
        label = None
        if raw.get("cm") is not None and raw.get("cc") is not None:
            label = WeakLabel.from_scores(int(raw["cm"]), int(raw["cc"]))
        aggregated = WeakLabelClass(raw["aggregated"]) if raw.get("aggregated") else None
        return cls(
            warning=Warning.from_dict(raw["warning"]),
            status=str(raw["status"]),
            label=label,
            aggregated=aggregated,
            code_context=tuple(raw.get("code_context", ())),
        )


@dataclass
class LabeledCorpus:
    rows: list[LabeledWarning]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def tally(self) -> dict[str, int]:
        out = {c.value: 0 for c in WeakLabelClass}
        for row in self.rows:
            out[row.target_class.value] += 1
        return out

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
            for r in self.rows
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str) -> "LabeledCorpus":
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rows.append(LabeledWarning.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise TriageError(f"labeled corpus line {lineno}: {exc}") from None
        return cls(rows=rows)

    @classmethod
    def load(cls, path: str | Path) -> "LabeledCorpus":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))


def label_corpus(
    mined: MinedCorpus,
    revisions: list[RevisionAnalysis],
    cfg: KeywordConfig | None = None,
) -> LabeledCorpus:
    """Score every actionable episode against its fix commit; false alarms
    pass through as false warnings; undecided episodes are dropped."""
    cfg = cfg or KeywordConfig()
    rows: list[LabeledWarning] = []
    for tracked in mined.tracked:
        if tracked.status is Status.UNDECIDED:
            continue
        warning = tracked.representative
        context = ()
        if 0 <= tracked.last_seen < len(revisions):
            snapshot = revisions[tracked.last_seen].snapshot
            context = tuple(code_context_lines(warning, snapshot))
        if tracked.status is Status.FALSE_ALARM:
            rows.append(
                LabeledWarning(warning=warning, status="false_warning", code_context=context)
            )
            continue
        commit, diff = fix_commit(tracked, revisions)
        ids = extract_context_identifiers(warning)
        cm = semantic_score(commit.message, warning, ids, cfg)
        cc = structural_score(diff, warning, ids, cfg)
        rows.append(
            LabeledWarning(
                warning=warning,
                status="actionable",
                label=WeakLabel.from_scores(cm, cc),
                code_context=context,
            )
        )
    return LabeledCorpus(rows=rows)
