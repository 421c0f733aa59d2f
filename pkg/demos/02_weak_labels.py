#!/usr/bin/env python3
"""Weak-labeling rules: scoring a warning against its fix commit.

The semantic rule reads the commit message (type keywords beat context
identifiers beat generic fix words); the structural rule reads the fix
diff (a type-specific fix pattern beats a change that merely lands in the
right half of the file). Their sum picks VTB, LTB, or UTB.
"""

from warntriage import (
    KeywordConfig,
    Warning,
    WarningType,
    aggregate_label,
    extract_context_identifiers,
    parse_unified_diff,
    semantic_score,
    structural_score,
)

warning = Warning(
    id="demo-1",
    warning_type=WarningType.NULL_DEREFERENCE,
    qualifier="`req` last assigned on line 6 could be null and is dereferenced at line 8",
    file="server.c",
    line=8,
    procedure="handle",
)

ids = extract_context_identifiers(warning)
print(f"context identifiers pulled from the qualifier: {ids}")

cfg = KeywordConfig()

print("\nsemantic tiers (commit message only):")
for message in (
    "Fix null dereference in handle()",   # type keyword        -> 3
    "guard req before the copy",          # context identifier  -> 2
    "solve sporadic crash on reconnect",  # generic fix word    -> 1
    "update changelog",                   # nothing             -> 0
):
    cm = semantic_score(message, warning, ids, cfg)
    print(f"  cm={cm}  {message!r}")

null_check_fix = parse_unified_diff(
    """\
--- a/server.c
+++ b/server.c
@@ -6,3 +6,4 @@
     request_t *req = next_request(c);

+    if (req == NULL) return -1;
     *req = normalize(*req);
"""
)
comment_touch = parse_unified_diff(
    """\
--- a/server.c
+++ b/server.c
@@ -1,1 +1,2 @@
 #include "server.h"
+/* tightened error handling */
"""
)
other_file = parse_unified_diff(
    """\
--- a/README.md
+++ b/README.md
@@ -1,1 +1,2 @@
 # demo
+Now with fewer crashes.
"""
)

print("\nstructural tiers (fix diff only):")
for name, diff in (
    ("adds a null check above the warning", null_check_fix),   # fix pattern -> 3
    ("touches the file above the warning", comment_touch),     # in scope    -> 1
    ("touches a different file", other_file),                  # nothing     -> 0
):
    cc = structural_score(diff, warning, ids, cfg)
    print(f"  cc={cc}  {name}")

print("\naggregation (cm + cc):")
for cm, cc in ((3, 3), (2, 1), (1, 1), (0, 1), (0, 0)):
    print(f"  cm={cm} cc={cc} -> {aggregate_label(cm, cc).value}")
