#!/usr/bin/env python3
"""The triage service: ranked list in, judgments out.

Ranks a small synthetic report, serves it on an ephemeral port, walks the
API the way the browser UI does (list, detail, judge, export), and shows
that the exported judgments are themselves a labeled corpus ready for
retraining. For the interactive version run:

    warntriage serve --model model.json --report report.json \\
        --sources src/ --state session.json --ui-dir frontend/dist
"""

import json
import threading
import urllib.request

from warntriage import LabeledCorpus, TrainingConfig, generate_labeled_corpus, rank
from warntriage.core import WeakLabelClass
from warntriage.service import TriageSession, make_server
from warntriage.training import train_two_stage

corpus = generate_labeled_corpus(
    {
        WeakLabelClass.VTB: 10,
        WeakLabelClass.LTB: 10,
        WeakLabelClass.UTB: 20,
        WeakLabelClass.FALSE_WARNING: 120,
    },
    seed=2,
)
trained = train_two_stage(
    corpus, embed_dim=512, hidden_dim=32,
    cfg=TrainingConfig(seed=2, epochs=150, learning_rate=0.3),
    reranker_cfg=TrainingConfig(seed=2, epochs=150, learning_rate=0.3),
)

# pretend the held-out warnings arrived as a fresh report
incoming = [corpus.rows[i] for i in trained.test_indices]
ranked = rank(
    [r.warning for r in incoming],
    None,
    trained.params,
    code_lines_by_id={r.warning.id: list(r.code_context) for r in incoming},
)

session = TriageSession(ranked, snapshot=None, model_digest="demo")
server = make_server(session, "127.0.0.1", 0)
base = f"http://127.0.0.1:{server.server_address[1]}"
threading.Thread(target=server.serve_forever, daemon=True).start()
print(f"service up at {base}")


def get(path):
    with urllib.request.urlopen(base + path) as resp:
        return json.loads(resp.read())


rows = get("/api/warnings")["warnings"]
print(f"\ntop of the ranked list ({len(rows)} warnings):")
for row in rows[:5]:
    print(f"  #{row['rank']:<3} [{row['band']:>6}] score={row['score']:+.3f} "
          f"{row['file']}:{row['line']} {row['procedure']}")

detail = get(f"/api/warnings/{rows[0]['id']}")
print(f"\ndetail of #1: class={detail['predicted_class']} "
      f"probs={[round(p, 3) for p in detail['class_probs']]}")

# a developer confirms the top warning and dismisses the second
for wid, verdict in ((rows[0]["id"], "confirmed"), (rows[1]["id"], "dismissed")):
    req = urllib.request.Request(
        f"{base}/api/warnings/{wid}/judgment",
        data=json.dumps({"verdict": verdict, "note": "demo pass"}).encode(),
        headers={"Content-Type": "application/json"},
    )
    urllib.request.urlopen(req)
print("\nrecorded one confirm and one dismiss")
print(f"meta now reports: {get('/api/meta')}")

with urllib.request.urlopen(base + "/api/export") as resp:
    exported = resp.read().decode()
relabeled = LabeledCorpus.from_jsonl(exported)
print(f"\nexported {len(relabeled)} judged warnings; "
      f"tally {relabeled.tally} (feeds straight back into `warntriage train`)")

server.shutdown()
server.server_close()
