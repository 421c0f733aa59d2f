import json

import pytest

from warntriage.core import WarningType
from warntriage.ingest.report import (
    DEFAULT_BUG_TYPE_MAP,
    ReportError,
    load_bug_type_map,
    parse_report,
)

NULL_DEREF_RECORD = {
    "bug_type": "NULL_DEREFERENCE",
    "qualifier": "`p` last assigned on line 12 could be null and is dereferenced at line 14",
    "file": "src/a.c",
    "line": 14,
    "procedure": "run",
}


def test_single_null_dereference():
    parsed = parse_report(json.dumps([NULL_DEREF_RECORD]).encode())
    assert len(parsed.warnings) == 1
    w = parsed.warnings[0]
    assert w.warning_type is WarningType.NULL_DEREFERENCE
    assert w.file == "src/a.c"
    assert w.line == 14
    assert w.procedure == "run"
    assert parsed.skipped == 0


def test_empty_array():
    parsed = parse_report(b"[]")
    assert parsed.warnings == []
    assert parsed.skipped == 0


def test_unmapped_bug_type_skipped_and_counted():
    records = [
        NULL_DEREF_RECORD,
        {
            "bug_type": "MEMORY_LEAK_C",
            "qualifier": "memory leaked",
            "file": "src/b.c",
            "line": 3,
            "procedure": "alloc_all",
        },
        {
            "bug_type": "DEAD_STORE",
            "qualifier": "The value written to `x` is never used.",
            "file": "src/b.c",
            "line": 9,
            "procedure": "calc",
        },
    ]
    parsed = parse_report(json.dumps(records))
    assert len(parsed.warnings) == 2
    assert parsed.skipped == 1
    assert parsed.skipped_types == {"MEMORY_LEAK_C": 1}


def test_document_order_preserved():
    records = [dict(NULL_DEREF_RECORD, line=i) for i in range(1, 6)]
    parsed = parse_report(json.dumps(records))
    assert [w.line for w in parsed.warnings] == [1, 2, 3, 4, 5]


def test_malformed_json_reports_byte_offset():
    with pytest.raises(ReportError, match="byte offset"):
        parse_report(b'[{"bug_type": }]')


def test_missing_field_reports_record_index():
    record = dict(NULL_DEREF_RECORD)
    del record["procedure"]
    with pytest.raises(ReportError, match="record 1"):
        parse_report(json.dumps([NULL_DEREF_RECORD, record]))


def test_non_array_document_rejected():
    with pytest.raises(ReportError, match="array"):
        parse_report(b'{"bug_type": "DEAD_STORE"}')


def test_line_must_be_integer():
    record = dict(NULL_DEREF_RECORD, line="14")
    with pytest.raises(ReportError, match="integer"):
        parse_report(json.dumps([record]))


def test_ids_stable_and_unique():
    records = [NULL_DEREF_RECORD, NULL_DEREF_RECORD]
    first = parse_report(json.dumps(records))
    second = parse_report(json.dumps(records))
    assert [w.id for w in first.warnings] == [w.id for w in second.warnings]
    assert len({w.id for w in first.warnings}) == 2


def test_revision_index_applied():
    parsed = parse_report(json.dumps([NULL_DEREF_RECORD]), revision_index=7)
    assert parsed.warnings[0].revision_index == 7


def test_default_map_covers_the_four_infer_types():
    assert set(DEFAULT_BUG_TYPE_MAP.values()) == set(WarningType)


def test_custom_map_from_file(tmp_path):
    path = tmp_path / "map.json"
    path.write_text(json.dumps({"NPE_X": "null_dereference"}))
    type_map = load_bug_type_map(path)
    record = dict(NULL_DEREF_RECORD, bug_type="NPE_X")
    parsed = parse_report(json.dumps([record, NULL_DEREF_RECORD]), type_map=type_map)
    assert len(parsed.warnings) == 1
    assert parsed.skipped == 1
