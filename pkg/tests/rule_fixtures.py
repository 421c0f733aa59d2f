"""Handcrafted (commit message, fix diff, warning) triples with their
expected semantic and structural scores.

Covers every message tier for each warning type and every fix/scope row of
the structural rules, including the scope-direction edges (a change below
an uninitialized-variable warning or above a resource-leak warning counts
for nothing).
"""

from __future__ import annotations

from dataclasses import dataclass

from warntriage.core import Warning, WarningType

FILE = "src/m.c"


def make_warning(kind: str) -> Warning:
    cases = {
        "uninit": (
            WarningType.UNINITIALIZED_VARIABLE,
            "The value read from `len` was never initialized.",
            8,
            "init_buf",
        ),
        "nullderef": (
            WarningType.NULL_DEREFERENCE,
            "`p` last assigned on line 12 could be null and is dereferenced at line 14",
            14,
            "parse_header",
        ),
        "leak": (
            WarningType.RESOURCE_LEAK,
            "Resource acquired to `fd` by call to `open` at line 18 is not released after line 20",
            20,
            "read_file",
        ),
        "deadstore": (
            WarningType.DEAD_STORE,
            "The value written to `tmp` is never used.",
            30,
            "compute",
        ),
    }
    wtype, qualifier, line, procedure = cases[kind]
    return Warning(
        id=f"fx-{kind}",
        warning_type=wtype,
        qualifier=qualifier,
        file=FILE,
        line=line,
        procedure=procedure,
    )


def add_line(new_line: int, text: str, file: str = FILE) -> str:
    return f"--- a/{file}\n+++ b/{file}\n@@ -{new_line - 1},0 +{new_line},1 @@\n+{text}\n"


def remove_line(old_line: int, text: str, file: str = FILE) -> str:
    return f"--- a/{file}\n+++ b/{file}\n@@ -{old_line},1 +{old_line - 1},0 @@\n-{text}\n"


@dataclass(frozen=True)
class RuleFixture:
    name: str
    kind: str
    message: str
    diff_text: str
    cm: int
    cc: int


FIXTURES = [
    RuleFixture(
        "uninit_type_keyword_and_assignment",
        "uninit",
        "Initialize len before first use",
        add_line(5, "    len = 0;"),
        cm=3,
        cc=3,
    ),
    RuleFixture(
        "uninit_identifier_and_reference_arg",
        "uninit",
        "set len before calling copy_n",
        add_line(5, '    scanf("%d", &len);'),
        cm=2,
        cc=3,
    ),
    RuleFixture(
        "uninit_common_keyword_and_scope",
        "uninit",
        "fix the windows build",
        add_line(3, "    /* sizing note */"),
        cm=1,
        cc=1,
    ),
    RuleFixture(
        "uninit_nothing_matches",
        "uninit",
        "bump version",
        add_line(2, "VERSION = 2", file="Makefile"),
        cm=0,
        cc=0,
    ),
    RuleFixture(
        "uninit_comparison_is_not_assignment",
        "uninit",
        "tighten bounds handling",
        add_line(5, "    if (len == 0) {"),
        cm=0,
        cc=1,
    ),
    RuleFixture(
        "nullderef_type_keyword_and_null_check",
        "nullderef",
        "Fix null dereference in parser",
        add_line(13, "    if (p == NULL) return -1;"),
        cm=3,
        cc=3,
    ),
    RuleFixture(
        "nullderef_identifier_and_negation_check",
        "nullderef",
        "guard p before use",
        add_line(12, "    if (!p) { return; }"),
        cm=2,
        cc=3,
    ),
    RuleFixture(
        "nullderef_common_keyword_and_scope",
        "nullderef",
        "solve build problem",
        add_line(5, "    /* rewritten comment */"),
        cm=1,
        cc=1,
    ),
    RuleFixture(
        "nullderef_check_below_warning_is_out_of_scope",
        "nullderef",
        "update docs",
        add_line(20, "    if (p == NULL) return -1;"),
        cm=0,
        cc=0,
    ),
    RuleFixture(
        "leak_type_keyword_and_free_call",
        "leak",
        "plug descriptor leak on error path",
        add_line(21, "    close(fd);"),
        cm=3,
        cc=3,
    ),
    RuleFixture(
        "leak_identifier_and_scope_after",
        "leak",
        "close fd when bailing out",
        add_line(25, "    ret = -1;"),
        cm=2,
        cc=1,
    ),
    RuleFixture(
        "leak_change_above_warning_is_out_of_scope",
        "leak",
        "fix error handling",
        add_line(5, "    errno = 0;"),
        cm=1,
        cc=0,
    ),
    RuleFixture(
        "leak_free_call_without_message_signal",
        "leak",
        "refactor io paths",
        add_line(30, "    fclose(fd);"),
        cm=0,
        cc=3,
    ),
    RuleFixture(
        "deadstore_type_keyword_and_use",
        "deadstore",
        "remove unused assignment",
        add_line(31, "    return tmp;"),
        cm=3,
        cc=3,
    ),
    RuleFixture(
        "deadstore_identifier_and_removed_assignment",
        "deadstore",
        "drop tmp from the loop",
        remove_line(30, "    tmp = scale(sum);"),
        cm=2,
        cc=3,
    ),
    RuleFixture(
        "deadstore_common_keyword_and_scope",
        "deadstore",
        "repair release build",
        add_line(35, "    /* layout note */"),
        cm=1,
        cc=1,
    ),
    RuleFixture(
        "deadstore_change_above_warning_is_out_of_scope",
        "deadstore",
        "tidy includes",
        add_line(3, "#include <string.h>"),
        cm=0,
        cc=0,
    ),
]
