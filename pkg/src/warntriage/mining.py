"""Warning lifecycle mining over an ordered revision sequence.

Presence is evaluated per revision by fingerprint-set membership. A
fingerprint that disappears and later returns starts a fresh episode, so
each disappearance keeps exactly one candidate fix commit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from warntriage.core import ContractViolation, TriageError, Warning, WarningFingerprint, WarningType
from warntriage.ingest.diff import DiffSet
from warntriage.ingest.history import CommitMeta, RevisionAnalysis

# Two years, expressed as 2 * 365.25 days.
TWO_YEARS_SECONDS = 63_115_200


class Status(str, Enum):
    ACTIONABLE = "actionable"
    FALSE_ALARM = "false_alarm"
    UNDECIDED = "undecided"


class FalseAlarmReason(str, Enum):
    FILE_DELETED = "file_deleted"
    AGED_OUT = "aged_out"


@dataclass(frozen=True)
class TrackedWarning:
    """One episode of a fingerprint's life across revisions."""

    fingerprint: WarningFingerprint
    representative: Warning  # from the last revision where present
    first_seen: int
    last_seen: int
    disappeared_at: int | None = None
    status: Status = Status.UNDECIDED
    reason: FalseAlarmReason | None = None

    def __post_init__(self) -> None:
        if self.first_seen > self.last_seen:
            raise ContractViolation("first_seen must not exceed last_seen")
        if self.disappeared_at is not None and self.disappeared_at != self.last_seen + 1:
            raise ContractViolation("disappeared_at must be last_seen + 1")
        if self.status is Status.ACTIONABLE and self.disappeared_at is None:
            raise ContractViolation("actionable warnings must have disappeared")

    def to_dict(self) -> dict[str, Any]:
        return {
            "fingerprint": {
                "warning_type": self.fingerprint.warning_type.value,
                "file": self.fingerprint.file,
                "procedure": self.fingerprint.procedure,
                "normalized_qualifier": self.fingerprint.normalized_qualifier,
            },
            "representative": self.representative.to_dict(),
            "first_seen": self.first_seen,
            "last_seen": self.last_seen,
            "disappeared_at": self.disappeared_at,
            "status": self.status.value,
            "reason": self.reason.value if self.reason else None,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "TrackedWarning":
        fp = raw["fingerprint"]
        return cls(
            fingerprint=WarningFingerprint(
                warning_type=WarningType(fp["warning_type"]),
                file=fp["file"],
                procedure=fp["procedure"],
                normalized_qualifier=fp["normalized_qualifier"],
            ),
            representative=Warning.from_dict(raw["representative"]),
            first_seen=int(raw["first_seen"]),
            last_seen=int(raw["last_seen"]),
            disappeared_at=None if raw.get("disappeared_at") is None else int(raw["disappeared_at"]),
            status=Status(raw.get("status", "undecided")),
            reason=FalseAlarmReason(raw["reason"]) if raw.get("reason") else None,
        )


@dataclass
class MinedCorpus:
    tracked: list[TrackedWarning]
    provenance: dict[str, Any]

    @property
    def counts(self) -> dict[str, int]:
        out = {s.value: 0 for s in Status}
        for t in self.tracked:
            out[t.status.value] += 1
        return out

    def by_status(self, status: Status) -> list[TrackedWarning]:
        return [t for t in self.tracked if t.status is status]

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(t.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
            for t in self.tracked
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str, provenance: dict[str, Any] | None = None) -> "MinedCorpus":
        tracked = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                tracked.append(TrackedWarning.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise TriageError(f"corpus line {lineno}: {exc}") from None
        return cls(tracked=tracked, provenance=provenance or {})

    @classmethod
    def load(cls, path: str | Path) -> "MinedCorpus":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"), {"source": str(path)})


def track(revisions: list[RevisionAnalysis]) -> list[TrackedWarning]:
    """Fold the revision sequence into fingerprint episodes.

    Episodes are emitted in order of first appearance (then report order),
    independent of how presence sets were computed.
    """
    if not revisions:
        raise ContractViolation("track requires at least one revision")

    episodes: list[TrackedWarning] = []
    open_by_fp: dict[WarningFingerprint, TrackedWarning] = {}

    for rev in revisions:
        ordinal = rev.commit.ordinal
        present: dict[WarningFingerprint, Warning] = {}
        for w in rev.warnings:
            present.setdefault(w.fingerprint(), w)

        for fp in list(open_by_fp):
            if fp not in present:
                ep = open_by_fp.pop(fp)
                episodes.append(replace(ep, disappeared_at=ep.last_seen + 1))

        for fp, w in present.items():
            ep = open_by_fp.get(fp)
            if ep is None:
                open_by_fp[fp] = TrackedWarning(
                    fingerprint=fp, representative=w, first_seen=ordinal, last_seen=ordinal
                )
            else:
                open_by_fp[fp] = replace(ep, representative=w, last_seen=ordinal)

    episodes.extend(open_by_fp.values())
    episodes.sort(key=lambda e: e.first_seen)
    return episodes


def _classify(
    tracked: TrackedWarning, revisions: list[RevisionAnalysis], now: int
) -> tuple[Status, FalseAlarmReason | None]:
    if tracked.disappeared_at is not None:
        diff = revisions[tracked.disappeared_at].diff_against_parent
        if tracked.fingerprint.file in diff.deleted_files():
            return Status.FALSE_ALARM, FalseAlarmReason.FILE_DELETED
        return Status.ACTIONABLE, None
    # open episodes always persist through the newest analyzed revision
    newest_ts = revisions[-1].commit.timestamp
    if now - newest_ts > TWO_YEARS_SECONDS:
        return Status.FALSE_ALARM, FalseAlarmReason.AGED_OUT
    return Status.UNDECIDED, None


def classify(tracked: TrackedWarning, revisions: list[RevisionAnalysis], now: int) -> Status:
    """Actionable, false alarm, or undecided for one episode."""
    return _classify(tracked, revisions, now)[0]


def fix_commit(
    tracked: TrackedWarning, revisions: list[RevisionAnalysis]
) -> tuple[CommitMeta, DiffSet]:
    """The bug-fix candidate: the revision where the episode's fingerprint vanished."""
    if tracked.status is not Status.ACTIONABLE:
        raise ContractViolation(
            f"fix_commit requires an actionable warning, got status {tracked.status.value}"
        )
    if tracked.disappeared_at is None or tracked.disappeared_at >= len(revisions):
        raise ContractViolation("actionable warning has no revision at its disappearance ordinal")
    rev = revisions[tracked.disappeared_at]
    return rev.commit, rev.diff_against_parent


def mine(
    revisions: list[RevisionAnalysis], now: int, source_id: str = ""
) -> MinedCorpus:
    """track + classify, producing a persistable corpus."""
    episodes = track(revisions)
    classified = []
    for ep in episodes:
        status, reason = _classify(ep, revisions, now)
        classified.append(replace(ep, status=status, reason=reason))
    provenance = {
        "source": source_id,
        "revisions": len(revisions),
        "first_sha": revisions[0].commit.sha,
        "last_sha": revisions[-1].commit.sha,
        "mined_at": now,
    }
    return MinedCorpus(tracked=classified, provenance=provenance)


def presence_sets(revisions: Iterable[RevisionAnalysis]) -> list[set[WarningFingerprint]]:
    """Per-revision fingerprint sets; exposed for diagnostics and tests."""
    return [{w.fingerprint() for w in rev.warnings} for rev in revisions]
