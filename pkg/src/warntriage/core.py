"""Shared vocabulary: warning records, fingerprints, weak-label classes.

Everything here is an immutable value type, safe to share across threads and
to use as dict keys.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any


class TriageError(Exception):
    """Base class for data and contract errors raised by this package."""


class ContractViolation(TriageError):
    """A caller broke a documented precondition."""


class WarningType(str, Enum):
    """The four analyzer bug categories handled by the pipeline.

    Any other analyzer bug-type string is rejected at ingestion.
    """

    UNINITIALIZED_VARIABLE = "uninitialized_variable"
    NULL_DEREFERENCE = "null_dereference"
    RESOURCE_LEAK = "resource_leak"
    DEAD_STORE = "dead_store"


class WeakLabelClass(str, Enum):
    """Aggregated warning classes, ordered by likelihood of being a real bug.

    FALSE_WARNING is a corpus status, not an output of score aggregation; it
    shares the enum because the reranker predicts over all four classes.
    """

    FALSE_WARNING = "false_warning"
    UTB = "UTB"
    LTB = "LTB"
    VTB = "VTB"

    @property
    def base_score(self) -> int:
        """0/1/2/3 for FALSE_WARNING/UTB/LTB/VTB."""
        return _BASE_SCORE[self]

    @property
    def is_awhb(self) -> bool:
        """Actionable warning with high probability of being a real bug."""
        return self in (WeakLabelClass.VTB, WeakLabelClass.LTB)


_BASE_SCORE = {
    WeakLabelClass.FALSE_WARNING: 0,
    WeakLabelClass.UTB: 1,
    WeakLabelClass.LTB: 2,
    WeakLabelClass.VTB: 3,
}

# Reranker output order; index in this tuple == base score.
CLASS_ORDER: tuple[WeakLabelClass, ...] = (
    WeakLabelClass.FALSE_WARNING,
    WeakLabelClass.UTB,
    WeakLabelClass.LTB,
    WeakLabelClass.VTB,
)


_DIGIT_RUN = re.compile(r"[0-9]+")


def normalize_qualifier(qualifier: str) -> str:
    """Lowercase, replace each digit run with "#", collapse whitespace.

    Idempotent; used to make qualifiers line-number-insensitive so they can
    serve as fingerprint material.
    """
    lowered = qualifier.lower()
    masked = _DIGIT_RUN.sub("#", lowered)
    return " ".join(masked.split())


@dataclass(frozen=True)
class Warning:
    """One analyzer finding; the atom of the whole pipeline."""

    id: str
    warning_type: WarningType
    qualifier: str
    file: str
    line: int
    procedure: str
    revision_index: int = 0

    def __post_init__(self) -> None:
        if self.line < 1:
            raise ContractViolation(f"warning line must be >= 1, got {self.line}")
        if not self.file:
            raise ContractViolation("warning file must be non-empty")
        if not self.qualifier:
            raise ContractViolation("warning qualifier must be non-empty")

    def fingerprint(self) -> "WarningFingerprint":
        return WarningFingerprint(
            warning_type=self.warning_type,
            file=self.file,
            procedure=self.procedure,
            normalized_qualifier=normalize_qualifier(self.qualifier),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "warning_type": self.warning_type.value,
            "qualifier": self.qualifier,
            "file": self.file,
            "line": self.line,
            "procedure": self.procedure,
            "revision_index": self.revision_index,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Warning":
        return cls(
            id=str(raw["id"]),
            warning_type=WarningType(raw["warning_type"]),
            qualifier=str(raw["qualifier"]),
            file=str(raw["file"]),
            line=int(raw["line"]),
            procedure=str(raw["procedure"]),
            revision_index=int(raw.get("revision_index", 0)),
        )


@dataclass(frozen=True)
class WarningFingerprint:
    """Line-insensitive identity of a warning across revisions.

    Deliberately excludes the line number (and digits inside the qualifier)
    so unrelated edits that shift lines do not break tracking.
    """

    warning_type: WarningType
    file: str
    procedure: str
    normalized_qualifier: str


_VALID_CM = (0, 1, 2, 3)
_VALID_CC = (0, 1, 3)


def aggregate_label(cm: int, cc: int) -> WeakLabelClass:
    """Combine the semantic and structural scores into a warning class.

    VTB when cm+cc > 3, LTB when 2 <= cm+cc <= 3, UTB when cm+cc < 2.
    Out-of-range inputs signal a rules-engine bug and are rejected.
    """
    if cm not in _VALID_CM:
        raise ContractViolation(f"semantic score must be one of {_VALID_CM}, got {cm!r}")
    if cc not in _VALID_CC:
        raise ContractViolation(f"structural score must be one of {_VALID_CC}, got {cc!r}")
    total = cm + cc
    if total > 3:
        return WeakLabelClass.VTB
    if total >= 2:
        return WeakLabelClass.LTB
    return WeakLabelClass.UTB


@dataclass(frozen=True)
class WeakLabel:
    """Semantic score, structural score, and their aggregated class."""

    cm: int
    cc: int
    aggregated: WeakLabelClass

    def __post_init__(self) -> None:
        expected = aggregate_label(self.cm, self.cc)
        if self.aggregated is not expected:
            raise ContractViolation(
                f"aggregated class {self.aggregated} inconsistent with "
                f"cm={self.cm}, cc={self.cc} (expected {expected})"
            )

    @classmethod
    def from_scores(cls, cm: int, cc: int) -> "WeakLabel":
        return cls(cm=cm, cc=cc, aggregated=aggregate_label(cm, cc))
