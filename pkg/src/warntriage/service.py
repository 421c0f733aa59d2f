"""HTTP triage service: ranked warnings, judgments, and label export.

State is a single JSON file replaced atomically on every judgment; writes
are serialized through one lock while reads work on snapshots. The static
triage UI is served from a directory when one is provided, else a minimal
built-in page that documents the API.
"""

from __future__ import annotations

import json
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any

from warntriage.core import WeakLabelClass
from warntriage.ingest.history import SourceSnapshot
from warntriage.model import RankedWarning
from warntriage.weaklabel import LabeledWarning

VERDICTS = ("confirmed", "dismissed")
EXCERPT_RADIUS = 10

_JUDGMENT_PATH = re.compile(r"^/api/warnings/([^/]+)/judgment$")
_DETAIL_PATH = re.compile(r"^/api/warnings/([^/]+)$")

FALLBACK_INDEX = """\
<!doctype html>
<html><head><meta charset="utf-8"><title>warntriage</title></head>
<body>
<h1>warntriage service</h1>
<p>No triage UI bundle is mounted. The JSON API is live:</p>
<ul>
<li>GET /api/warnings</li>
<li>GET /api/warnings/{id}</li>
<li>POST /api/warnings/{id}/judgment</li>
<li>GET /api/export</li>
<li>GET /api/meta</li>
</ul>
</body></html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class TriageSession:
    """Ranked warnings plus persistent judgments for one served report."""

    def __init__(
        self,
        ranked: list[RankedWarning],
        snapshot: SourceSnapshot | None,
        state_path: str | Path | None = None,
        model_digest: str = "",
        report_digest: str = "",
    ):
        self.ranked = ranked
        self.by_id = {r.warning.id: r for r in ranked}
        self.snapshot = snapshot
        self.state_path = Path(state_path) if state_path else None
        self.model_digest = model_digest
        self.report_digest = report_digest
        self._lock = threading.Lock()
        self.judgments: dict[str, dict[str, Any]] = {}
        self.history: list[dict[str, Any]] = []
        if self.state_path and self.state_path.exists():
            doc = json.loads(self.state_path.read_text(encoding="utf-8"))
            self.judgments = doc.get("judgments", {})
            self.history = doc.get("history", [])

    def _persist(self) -> None:
        if self.state_path is None:
            return
        doc = {
            "judgments": self.judgments,
            "history": self.history,
            "report_digest": self.report_digest,
        }
        tmp = self.state_path.with_suffix(self.state_path.suffix + ".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True, indent=1), encoding="utf-8")
        tmp.replace(self.state_path)

    def judge(self, warning_id: str, verdict: str, note: str = "") -> dict[str, Any]:
        if warning_id not in self.by_id:
            raise KeyError(warning_id)
        if verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {verdict!r}")
        record = {
            "warning_id": warning_id,
            "verdict": verdict,
            "note": note,
            "timestamp": time.time(),
        }
        with self._lock:
            self.judgments[warning_id] = record
            self.history.append(record)
            self._persist()
        return record

    def rows(self) -> list[dict[str, Any]]:
        judged = dict(self.judgments)
        out = []
        for position, r in enumerate(self.ranked, 1):
            judgment = judged.get(r.warning.id)
            out.append(
                {
                    "id": r.warning.id,
                    "rank": position,
                    "warning_type": r.warning.warning_type.value,
                    "qualifier": r.warning.qualifier,
                    "file": r.warning.file,
                    "line": r.warning.line,
                    "procedure": r.warning.procedure,
                    "predicted_class": r.prediction.predicted_class.value,
                    "score": r.prediction.score,
                    "band": r.band,
                    "verdict": judgment["verdict"] if judgment else None,
                }
            )
        return out

    def detail(self, warning_id: str) -> dict[str, Any] | None:
        r = self.by_id.get(warning_id)
        if r is None:
            return None
        doc = {
            "id": r.warning.id,
            "warning_type": r.warning.warning_type.value,
            "qualifier": r.warning.qualifier,
            "file": r.warning.file,
            "line": r.warning.line,
            "procedure": r.warning.procedure,
            "predicted_class": r.prediction.predicted_class.value,
            "class_probs": list(r.prediction.class_probs),
            "detector_prob": r.prediction.detector_prob,
            "score": r.prediction.score,
            "band": r.band,
            "verdict": None,
            "excerpt": None,
        }
        judgment = self.judgments.get(warning_id)
        if judgment:
            doc["verdict"] = judgment["verdict"]
            doc["note"] = judgment.get("note", "")
        if self.snapshot is not None:
            lines = self.snapshot.lines(r.warning.file)
            if lines is not None and r.warning.line <= len(lines):
                start = max(1, r.warning.line - EXCERPT_RADIUS)
                end = min(len(lines), r.warning.line + EXCERPT_RADIUS)
                doc["excerpt"] = {
                    "start_line": start,
                    "warning_line": r.warning.line,
                    "lines": lines[start - 1 : end],
                }
        return doc

    def export_jsonl(self) -> str:
        """Judged warnings as labeled-corpus rows, ready for retraining."""
        rows = []
        with self._lock:
            judged = dict(self.judgments)
        for r in self.ranked:
            judgment = judged.get(r.warning.id)
            if judgment is None:
                continue
            if judgment["verdict"] == "confirmed":
                row = LabeledWarning(
                    warning=r.warning, status="actionable", aggregated=WeakLabelClass.VTB
                )
            else:
                row = LabeledWarning(warning=r.warning, status="false_warning")
            rows.append(json.dumps(row.to_dict(), sort_keys=True, separators=(",", ":")))
        return "".join(line + "\n" for line in rows)

    def meta(self) -> dict[str, Any]:
        bands = {"red": 0, "orange": 0, "none": 0}
        for r in self.ranked:
            bands[r.band] += 1
        return {
            "model_digest": self.model_digest,
            "report_digest": self.report_digest,
            "total": len(self.ranked),
            "bands": bands,
            "judged": len(self.judgments),
        }


class _Handler(BaseHTTPRequestHandler):
    # injected by make_server
    session: TriageSession
    ui_dir: Path | None

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, body: bytes, content_type: str, extra: dict | None = None):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for k, v in (extra or {}).items():
            self.send_header(k, v)
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc: Any):
        self._send(status, json.dumps(doc).encode("utf-8"), "application/json")

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/api/warnings":
            self._send_json(200, {"warnings": self.session.rows(), "total": len(self.session.ranked)})
            return
        if path == "/api/meta":
            self._send_json(200, self.session.meta())
            return
        if path == "/api/export":
            body = self.session.export_jsonl().encode("utf-8")
            self._send(
                200, body, "application/x-ndjson",
                {"Content-Disposition": "attachment; filename=judged.jsonl"},
            )
            return
        m = _DETAIL_PATH.match(path)
        if m:
            doc = self.session.detail(m.group(1))
            if doc is None:
                self._send_json(404, {"error": f"unknown warning id {m.group(1)!r}"})
            else:
                self._send_json(200, doc)
            return
        self._serve_static(path)

    def do_POST(self):
        path = self.path.split("?", 1)[0]
        m = _JUDGMENT_PATH.match(path)
        if not m:
            self._send_json(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        try:
            doc = json.loads(raw or b"{}")
            if not isinstance(doc, dict):
                raise ValueError("judgment body must be a JSON object")
            verdict = doc.get("verdict")
            record = self.session.judge(m.group(1), verdict, str(doc.get("note", "")))
        except KeyError:
            self._send_json(404, {"error": f"unknown warning id {m.group(1)!r}"})
            return
        except (ValueError, json.JSONDecodeError) as exc:
            self._send_json(422, {"error": str(exc)})
            return
        self._send_json(200, {"judgment": record})

    def _serve_static(self, path: str):
        if path == "/":
            path = "/index.html"
        if self.ui_dir is not None:
            base = self.ui_dir.resolve()
            target = (base / path.lstrip("/")).resolve()
            if base in target.parents or target == base:
                if target.is_file():
                    ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
                    self._send(200, target.read_bytes(), ctype)
                    return
        if path == "/index.html":
            self._send(200, FALLBACK_INDEX.encode("utf-8"), "text/html; charset=utf-8")
            return
        self._send_json(404, {"error": "not found"})


def make_server(
    session: TriageSession,
    host: str = "127.0.0.1",
    port: int = 8321,
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Bound, ready-to-serve HTTP server; raises OSError if the port is busy."""
    handler = type(
        "BoundHandler",
        (_Handler,),
        {"session": session, "ui_dir": Path(ui_dir) if ui_dir else None},
    )
    return ThreadingHTTPServer((host, port), handler)
