"""Analyzer report parsing.

A report is a JSON array of finding records using the `infer` vocabulary:
required fields `bug_type`, `qualifier`, `file`, `line`, `procedure`.
Findings whose bug_type is outside the configured mapping are skipped and
counted, never turned into warnings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from warntriage.core import TriageError, Warning, WarningType

# Analyzer code -> warning type, covering infer's default C checks.
DEFAULT_BUG_TYPE_MAP: dict[str, WarningType] = {
    "UNINITIALIZED_VALUE": WarningType.UNINITIALIZED_VARIABLE,
    "NULL_DEREFERENCE": WarningType.NULL_DEREFERENCE,
    "RESOURCE_LEAK": WarningType.RESOURCE_LEAK,
    "DEAD_STORE": WarningType.DEAD_STORE,
}

_REQUIRED_FIELDS = ("bug_type", "qualifier", "file", "line", "procedure")


class ReportError(TriageError):
    """Malformed report document or record."""


@dataclass
class ParsedReport:
    warnings: list[Warning]
    skipped: int = 0
    skipped_types: dict[str, int] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.warnings)

    def __len__(self) -> int:
        return len(self.warnings)


def load_bug_type_map(path: str | Path) -> dict[str, WarningType]:
    """Read a {analyzer string: warning type value} JSON mapping file."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ReportError(f"bug-type map {path} must be a JSON object")
    try:
        return {str(k): WarningType(v) for k, v in raw.items()}
    except ValueError as exc:
        raise ReportError(f"bug-type map {path}: {exc}") from None


def _warning_id(revision_index: int, index: int, record: dict) -> str:
    material = "|".join(
        str(v)
        for v in (
            revision_index,
            index,
            record["bug_type"],
            record["file"],
            record["line"],
            record["procedure"],
            record["qualifier"],
        )
    )
    return hashlib.sha1(material.encode("utf-8")).hexdigest()[:12]


def parse_report(
    data: bytes | str,
    revision_index: int = 0,
    type_map: dict[str, WarningType] | None = None,
) -> ParsedReport:
    """Parse a report document into warnings, in document order.

    Raises ReportError with the byte offset on malformed JSON and with the
    record index on a record missing a required field.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    type_map = DEFAULT_BUG_TYPE_MAP if type_map is None else type_map

    try:
        document = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ReportError(f"malformed report document at byte offset {exc.pos}: {exc.msg}") from None
    if not isinstance(document, list):
        raise ReportError("report document must be a JSON array of records")

    warnings: list[Warning] = []
    skipped = 0
    skipped_types: dict[str, int] = {}
    for index, record in enumerate(document):
        if not isinstance(record, dict):
            raise ReportError(f"record {index}: expected a JSON object")
        missing = [f for f in _REQUIRED_FIELDS if f not in record]
        if missing:
            raise ReportError(f"record {index}: missing required field(s) {', '.join(missing)}")
        bug_type = record["bug_type"]
        if not isinstance(bug_type, str):
            raise ReportError(f"record {index}: bug_type must be a string")
        if not isinstance(record["line"], int) or isinstance(record["line"], bool):
            raise ReportError(f"record {index}: line must be an integer")
        for f in ("qualifier", "file", "procedure"):
            if not isinstance(record[f], str):
                raise ReportError(f"record {index}: {f} must be a string")

        wtype = type_map.get(bug_type)
        if wtype is None:
            skipped += 1
            skipped_types[bug_type] = skipped_types.get(bug_type, 0) + 1
            continue
        warnings.append(
            Warning(
                id=_warning_id(revision_index, index, record),
                warning_type=wtype,
                qualifier=record["qualifier"],
                file=record["file"],
                line=record["line"],
                procedure=record["procedure"],
                revision_index=revision_index,
            )
        )
    return ParsedReport(warnings=warnings, skipped=skipped, skipped_types=skipped_types)
