#!/usr/bin/env python3
"""Mining warning lifecycles out of a revision history.

Builds a tiny four-revision project fixture on disk, loads it, and mines
it: a warning that vanishes after a fix becomes actionable, one that sits
in every revision stays open, and the open one ages into a false alarm
once the history is old enough.
"""

import json
import tempfile
from pathlib import Path

from warntriage import load_history, mine

DAY = 86_400
BASE_TS = 1_700_000_000

NULL_DEREF = {
    "bug_type": "NULL_DEREFERENCE",
    "qualifier": "`req` last assigned on line 6 could be null and is dereferenced at line 8",
    "file": "server.c",
    "line": 8,
    "procedure": "handle",
}
DEAD_STORE = {
    "bug_type": "DEAD_STORE",
    "qualifier": "The value written to `retries` is never used.",
    "file": "server.c",
    "line": 14,
    "procedure": "reconnect",
}

SERVER_C = """\
#include "server.h"

int handle(conn_t *c) {
    int status = 0;

    request_t *req = next_request(c);

    *req = normalize(*req);
    return status;
}

int reconnect(conn_t *c) {
    int backoff = 1;
    int retries = c->retries + 1;
    return dial(c, backoff);
}
"""

FIX_PATCH = """\
--- a/server.c
+++ b/server.c
@@ -6,3 +6,4 @@
     request_t *req = next_request(c);

+    if (req == NULL) return -1;
     *req = normalize(*req);
"""

# revision -> (message, report records, patch against parent)
REVISIONS = [
    ("Initial import", [NULL_DEREF, DEAD_STORE], ""),
    ("Tune reconnect backoff", [NULL_DEREF, DEAD_STORE], ""),
    ("Fix null dereference in handle()", [DEAD_STORE], FIX_PATCH),
    ("Update changelog", [DEAD_STORE], ""),
]


def build_fixture(root: Path) -> Path:
    (root / "reports").mkdir(parents=True)
    (root / "diffs").mkdir()
    with open(root / "commits.jsonl", "w") as fh:
        for i, (message, _, _) in enumerate(REVISIONS):
            sha = f"{i:040x}"
            fh.write(json.dumps({"sha": sha, "timestamp": BASE_TS + i * DAY, "message": message}) + "\n")
    for i, (_, records, patch) in enumerate(REVISIONS):
        sha = f"{i:040x}"
        (root / "reports" / f"{sha}.json").write_text(json.dumps(records))
        (root / "diffs" / f"{sha}.patch").write_text(patch)
        src = root / "sources" / sha
        src.mkdir(parents=True)
        (src / "server.c").write_text(SERVER_C)
    return root


def show(corpus, heading):
    print(f"\n{heading}")
    print(f"{'procedure':<12}{'episode':<10}{'status':<14}{'reason':<14}")
    for ep in corpus.tracked:
        span = f"r{ep.first_seen}-r{ep.last_seen}"
        reason = ep.reason.value if ep.reason else "-"
        print(f"{ep.representative.procedure:<12}{span:<10}{ep.status.value:<14}{reason:<14}")
    print(f"tallies: {corpus.counts}")


with tempfile.TemporaryDirectory() as tmp:
    fixture = build_fixture(Path(tmp) / "demo-project")
    revisions = load_history(fixture, mode="fixture")
    print(f"loaded {len(revisions)} revisions:")
    for rev in revisions:
        print(f"  r{rev.commit.ordinal}: {rev.commit.message!r} with {len(rev.warnings)} warnings")

    last_ts = revisions[-1].commit.timestamp

    # Shortly after the last revision, the surviving dead store is undecided.
    show(mine(revisions, now=last_ts + 30 * DAY), "one month after the last revision:")

    # Three years later it has aged out and counts as a false alarm.
    show(mine(revisions, now=last_ts + 3 * 365 * DAY), "three years after the last revision:")
