import json

import pytest

from fixture_repo import EXPECTED_LABELS, NOW_YOUNG
from rule_fixtures import FIXTURES, add_line, make_warning
from warntriage.core import TriageError, WarningType, WeakLabelClass
from warntriage.ingest.diff import DiffSet, parse_unified_diff
from warntriage.ingest.history import load_history
from warntriage.mining import mine
from warntriage.weaklabel import (
    ContextIdentifiers,
    KeywordConfig,
    LabeledCorpus,
    extract_context_identifiers,
    label_corpus,
    semantic_score,
    structural_score,
)

CFG = KeywordConfig()


class TestExtractContextIdentifiers:
    def test_uninitialized_variable(self):
        ids = extract_context_identifiers(make_warning("uninit"))
        assert ids == ContextIdentifiers(variable="len")

    def test_null_dereference(self):
        ids = extract_context_identifiers(make_warning("nullderef"))
        assert ids == ContextIdentifiers(pointer="p")

    def test_resource_leak_variable_and_function(self):
        ids = extract_context_identifiers(make_warning("leak"))
        assert ids == ContextIdentifiers(variable="fd", function="open")

    def test_dead_store(self):
        ids = extract_context_identifiers(make_warning("deadstore"))
        assert ids == ContextIdentifiers(variable="tmp")

    def test_unrecognized_text_degrades_to_empty(self):
        w = make_warning("uninit")
        odd = type(w)(
            id="x",
            warning_type=WarningType.UNINITIALIZED_VARIABLE,
            qualifier="unrecognized text",
            file=w.file,
            line=w.line,
            procedure=w.procedure,
        )
        assert extract_context_identifiers(odd) == ContextIdentifiers()


class TestRuleFixtures:
    @pytest.mark.parametrize("fx", FIXTURES, ids=lambda fx: fx.name)
    def test_semantic_score(self, fx):
        warning = make_warning(fx.kind)
        ids = extract_context_identifiers(warning)
        assert semantic_score(fx.message, warning, ids, CFG) == fx.cm

    @pytest.mark.parametrize("fx", FIXTURES, ids=lambda fx: fx.name)
    def test_structural_score(self, fx):
        warning = make_warning(fx.kind)
        ids = extract_context_identifiers(warning)
        diff = parse_unified_diff(fx.diff_text)
        assert structural_score(diff, warning, ids, CFG) == fx.cc


class TestSemanticScore:
    def test_identifier_match_is_case_sensitive(self):
        warning = make_warning("nullderef")
        ids = extract_context_identifiers(warning)
        assert semantic_score("guard P before use", warning, ids, CFG) == 0
        assert semantic_score("guard p before use", warning, ids, CFG) == 2

    def test_tier_maximality(self):
        warning = make_warning("nullderef")
        ids = extract_context_identifiers(warning)
        base = "fix null pointer handling"
        assert semantic_score(base, warning, ids, CFG) == 3
        # piling on lower-tier matches never lowers the score
        assert semantic_score(base + " bug problem p", warning, ids, CFG) == 3

    def test_word_boundaries(self):
        warning = make_warning("leak")
        ids = extract_context_identifiers(warning)
        # "leaky" does not contain the token "leak"
        assert semantic_score("leaky abstraction cleanup", warning, ids, CFG) == 0

    def test_multiword_phrase_ignores_punctuation(self):
        warning = make_warning("nullderef")
        ids = extract_context_identifiers(warning)
        assert semantic_score("fixed a null-dereference in open()", warning, ids, CFG) == 3


class TestStructuralScore:
    def test_empty_diff_scores_zero_for_every_type(self):
        for kind in ("uninit", "nullderef", "leak", "deadstore"):
            warning = make_warning(kind)
            ids = extract_context_identifiers(warning)
            assert structural_score(DiffSet(()), warning, ids, CFG) == 0

    def test_range_is_0_1_3(self):
        seen = set()
        for fx in FIXTURES:
            warning = make_warning(fx.kind)
            ids = extract_context_identifiers(warning)
            seen.add(structural_score(parse_unified_diff(fx.diff_text), warning, ids, CFG))
        assert seen == {0, 1, 3}

    def test_unknown_identifier_degrades_to_scope(self):
        warning = make_warning("uninit")
        diff = parse_unified_diff(add_line(5, "    len = 0;"))
        assert structural_score(diff, warning, ContextIdentifiers(), CFG) == 1


class TestKeywordConfig:
    def test_defaults_are_lowercase_and_nonempty(self):
        cfg = KeywordConfig()
        for words in cfg.type_keywords.values():
            assert words and all(w == w.lower() for w in words)
        assert cfg.common_keywords

    def test_override_file(self, tmp_path):
        path = tmp_path / "kw.json"
        path.write_text(
            json.dumps(
                {
                    "common_keywords": ["hotfix"],
                    "types": {"null_dereference": {"type_keywords": ["segfault"]}},
                }
            )
        )
        cfg = KeywordConfig.load(path)
        warning = make_warning("nullderef")
        ids = extract_context_identifiers(warning)
        assert semantic_score("segfault in parser", warning, ids, cfg) == 3
        assert semantic_score("hotfix for release", warning, ids, cfg) == 1
        assert semantic_score("fix crash", warning, ids, cfg) == 0

    def test_bad_file_rejected(self, tmp_path):
        path = tmp_path / "kw.json"
        path.write_text("{not json")
        with pytest.raises(TriageError):
            KeywordConfig.load(path)

    def test_unknown_type_rejected(self, tmp_path):
        path = tmp_path / "kw.json"
        path.write_text(json.dumps({"types": {"buffer_overrun": {"type_keywords": ["x"]}}}))
        with pytest.raises(TriageError):
            KeywordConfig.load(path)

    def test_uppercase_keyword_rejected(self):
        with pytest.raises(TriageError):
            KeywordConfig(common_keywords=("Fix",))


class TestLabelCorpus:
    def test_fixture_labels(self, fixture_dir):
        revisions = load_history(fixture_dir, mode="fixture")
        mined = mine(revisions, now=NOW_YOUNG)
        labeled = label_corpus(mined, revisions)
        by_proc = {row.warning.procedure: row for row in labeled if row.is_actionable}
        for proc, (cm, cc, aggregated) in EXPECTED_LABELS.items():
            row = by_proc[proc]
            assert (row.label.cm, row.label.cc) == (cm, cc), proc
            assert row.aggregated.value == aggregated, proc

    def test_tally_partitions_input(self, fixture_dir):
        revisions = load_history(fixture_dir, mode="fixture")
        mined = mine(revisions, now=NOW_YOUNG)
        labeled = label_corpus(mined, revisions)
        tally = labeled.tally
        n_actionable = mined.counts["actionable"]
        assert tally["VTB"] + tally["LTB"] + tally["UTB"] == n_actionable
        assert tally["false_warning"] == mined.counts["false_alarm"]
        assert len(labeled) == n_actionable + mined.counts["false_alarm"]

    def test_undecided_dropped(self, fixture_dir):
        revisions = load_history(fixture_dir, mode="fixture")
        mined = mine(revisions, now=NOW_YOUNG)
        labeled = label_corpus(mined, revisions)
        assert len(labeled) < len(mined.tracked)

    def test_code_context_captured(self, fixture_dir):
        revisions = load_history(fixture_dir, mode="fixture")
        mined = mine(revisions, now=NOW_YOUNG)
        labeled = label_corpus(mined, revisions)
        by_proc = {row.warning.procedure: row for row in labeled}
        ctx = by_proc["parse_header"].code_context
        assert any("*p = normalize_header(*p);" in line for line in ctx)
        assert any("int parse_header" in line for line in ctx)

    def test_jsonl_round_trip(self, fixture_dir):
        revisions = load_history(fixture_dir, mode="fixture")
        labeled = label_corpus(mine(revisions, now=NOW_YOUNG), revisions)
        loaded = LabeledCorpus.from_jsonl(labeled.to_jsonl())
        assert loaded.rows == labeled.rows

    def test_determinism(self, fixture_dir):
        revisions = load_history(fixture_dir, mode="fixture")
        mined = mine(revisions, now=NOW_YOUNG)
        assert label_corpus(mined, revisions).to_jsonl() == label_corpus(mined, revisions).to_jsonl()


class TestEq1OnFixtures:
    def test_aggregation_classes(self):
        from warntriage.core import aggregate_label

        for fx in FIXTURES:
            expected = aggregate_label(fx.cm, fx.cc)
            total = fx.cm + fx.cc
            if total > 3:
                assert expected is WeakLabelClass.VTB
            elif total >= 2:
                assert expected is WeakLabelClass.LTB
            else:
                assert expected is WeakLabelClass.UTB
