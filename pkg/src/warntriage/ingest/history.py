"""Revision history loading: offline fixture layout and live git adapter.

Fixture layout (all shas lowercase hex):
    commits.jsonl        one {"sha", "timestamp", "message"} per line, oldest first
    reports/<sha>.json   analyzer report for that revision (required)
    diffs/<sha>.patch    unified diff against the parent revision (required)
    sources/<sha>/       optional source tree snapshot

Live mode walks first-parent git history via the git command-line client and
takes per-revision reports either from a directory of pre-generated files or
by running a configured analyzer command on a detached worktree.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from warntriage.core import TriageError, Warning
from warntriage.ingest.diff import DiffParseError, DiffSet, parse_unified_diff
from warntriage.ingest.report import ReportError, parse_report
from warntriage.core import WarningType

# Hash of git's empty tree; diffing the root commit against it yields its full patch.
_EMPTY_TREE = "4b825dc642cb6eb9a060e54bf8d69288fbee4904"


class CorpusIntegrityError(TriageError):
    """A revision source is incomplete or internally inconsistent."""


@dataclass(frozen=True)
class CommitMeta:
    sha: str
    timestamp: int
    message: str
    ordinal: int

    def to_dict(self) -> dict:
        return {
            "sha": self.sha,
            "timestamp": self.timestamp,
            "message": self.message,
            "ordinal": self.ordinal,
        }


class SourceSnapshot:
    """File path -> full text mapping for one revision."""

    def __init__(self, files: Mapping[str, str] | None = None):
        self._files = dict(files or {})

    def get(self, path: str) -> str | None:
        return self._files.get(path)

    def __contains__(self, path: str) -> bool:
        return path in self._files

    def paths(self) -> list[str]:
        return sorted(self._files)

    def lines(self, path: str) -> list[str] | None:
        text = self.get(path)
        if text is None:
            return None
        return text.split("\n")

    @classmethod
    def from_dir(cls, root: str | Path) -> "SourceSnapshot":
        root = Path(root)
        files = {}
        for p in sorted(root.rglob("*")):
            if p.is_file():
                files[p.relative_to(root).as_posix()] = p.read_text(
                    encoding="utf-8", errors="replace"
                )
        return cls(files)


@dataclass(frozen=True)
class RevisionAnalysis:
    commit: CommitMeta
    warnings: tuple[Warning, ...]
    diff_against_parent: DiffSet
    snapshot: SourceSnapshot | None = None


def load_history(
    source: str | Path,
    mode: str = "fixture",
    limit: int | None = None,
    analyzer_cmd: str | None = None,
    reports_dir: str | Path | None = None,
    type_map: dict[str, WarningType] | None = None,
) -> list[RevisionAnalysis]:
    """Load an ordered revision sequence from a fixture directory or git repo.

    With `limit`, only the most recent `limit` first-parent revisions are
    kept and their ordinals re-based to 0..limit-1.
    """
    if mode == "fixture":
        return _load_fixture(Path(source), limit, type_map)
    if mode == "git":
        return _load_git(Path(source), limit, analyzer_cmd, reports_dir, type_map)
    raise ValueError(f"unknown history mode {mode!r} (expected 'fixture' or 'git')")


# --- fixture mode ---------------------------------------------------------


def _load_fixture(
    root: Path, limit: int | None, type_map: dict[str, WarningType] | None
) -> list[RevisionAnalysis]:
    commits_file = root / "commits.jsonl"
    if not commits_file.is_file():
        raise CorpusIntegrityError(f"fixture {root} has no commits.jsonl")

    raw_commits = []
    for lineno, line in enumerate(commits_file.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            raw_commits.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise CorpusIntegrityError(f"commits.jsonl line {lineno}: {exc.msg}") from None

    if limit is not None:
        raw_commits = raw_commits[-limit:]

    revisions = []
    for ordinal, raw in enumerate(raw_commits):
        try:
            commit = CommitMeta(
                sha=str(raw["sha"]),
                timestamp=int(raw["timestamp"]),
                message=str(raw["message"]),
                ordinal=ordinal,
            )
        except KeyError as exc:
            raise CorpusIntegrityError(f"commits.jsonl record {ordinal}: missing {exc}") from None
        revisions.append(_load_fixture_revision(root, commit, type_map))
    _check_ordering(revisions)
    return revisions


def _load_fixture_revision(
    root: Path, commit: CommitMeta, type_map: dict[str, WarningType] | None
) -> RevisionAnalysis:
    report_path = root / "reports" / f"{commit.sha}.json"
    if not report_path.is_file():
        raise CorpusIntegrityError(f"missing report for revision {commit.sha}: {report_path}")
    try:
        parsed = parse_report(
            report_path.read_bytes(), revision_index=commit.ordinal, type_map=type_map
        )
    except ReportError as exc:
        raise CorpusIntegrityError(f"report for revision {commit.sha}: {exc}") from None

    diff_path = root / "diffs" / f"{commit.sha}.patch"
    if not diff_path.is_file():
        raise CorpusIntegrityError(f"missing diff for revision {commit.sha}: {diff_path}")
    try:
        diff = parse_unified_diff(diff_path.read_bytes())
    except DiffParseError as exc:
        raise CorpusIntegrityError(f"unparsable diff for revision {commit.sha}: {exc}") from None

    sources_dir = root / "sources" / commit.sha
    snapshot = SourceSnapshot.from_dir(sources_dir) if sources_dir.is_dir() else None
    return RevisionAnalysis(
        commit=commit, warnings=tuple(parsed.warnings), diff_against_parent=diff, snapshot=snapshot
    )


def _check_ordering(revisions: list[RevisionAnalysis]) -> None:
    for i in range(1, len(revisions)):
        if revisions[i].commit.timestamp < revisions[i - 1].commit.timestamp:
            raise CorpusIntegrityError(
                f"revision {revisions[i].commit.sha} is older than its predecessor"
            )


# --- live git mode --------------------------------------------------------


def _git(repo: Path, *args: str) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise CorpusIntegrityError(
            f"git {' '.join(args[:2])} failed in {repo}: {proc.stderr.strip()}"
        )
    return proc.stdout


def _first_parent_commits(repo: Path, limit: int | None) -> list[CommitMeta]:
    # %x01 separates fields, %x02 terminates records; %B keeps the full message.
    out = _git(repo, "log", "--first-parent", "--reverse", "--format=%H%x01%ct%x01%B%x02")
    commits = []
    for record in out.split("\x02"):
        record = record.strip("\n")
        if not record.strip():
            continue
        sha, ts, message = record.split("\x01", 2)
        commits.append((sha.strip(), int(ts), message.rstrip("\n")))
    if limit is not None:
        commits = commits[-limit:]
    return [
        CommitMeta(sha=sha, timestamp=ts, message=msg, ordinal=i)
        for i, (sha, ts, msg) in enumerate(commits)
    ]


def _git_diff(repo: Path, sha: str) -> DiffSet:
    parents = _git(repo, "rev-list", "--parents", "-n", "1", sha).split()
    base = parents[1] if len(parents) > 1 else _EMPTY_TREE
    text = _git(repo, "diff", "--no-color", base, sha)
    try:
        return parse_unified_diff(text)
    except DiffParseError as exc:
        raise CorpusIntegrityError(f"unparsable diff for revision {sha}: {exc}") from None


def _git_snapshot(repo: Path, sha: str, files: Iterable[str]) -> SourceSnapshot:
    contents = {}
    for path in sorted(set(files)):
        proc = subprocess.run(
            ["git", "-C", str(repo), "show", f"{sha}:{path}"],
            capture_output=True,
            text=True,
        )
        if proc.returncode == 0:
            contents[path] = proc.stdout
    return SourceSnapshot(contents)


def _run_analyzer(repo: Path, sha: str, analyzer_cmd: str) -> bytes:
    with tempfile.TemporaryDirectory(prefix="warntriage-wt-") as tmp:
        checkout = Path(tmp) / "checkout"
        out_file = Path(tmp) / "report.json"
        _git(repo, "worktree", "add", "--detach", str(checkout), sha)
        try:
            cmd = [
                token.format(checkout_dir=str(checkout), out_file=str(out_file))
                for token in shlex.split(analyzer_cmd)
            ]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                raise CorpusIntegrityError(
                    f"analyzer command failed for revision {sha}: {proc.stderr.strip()}"
                )
            if not out_file.is_file():
                raise CorpusIntegrityError(
                    f"analyzer command produced no report for revision {sha}"
                )
            return out_file.read_bytes()
        finally:
            subprocess.run(
                ["git", "-C", str(repo), "worktree", "remove", "--force", str(checkout)],
                capture_output=True,
            )


def _load_git(
    repo: Path,
    limit: int | None,
    analyzer_cmd: str | None,
    reports_dir: str | Path | None,
    type_map: dict[str, WarningType] | None,
) -> list[RevisionAnalysis]:
    if reports_dir is None and analyzer_cmd is None:
        raise CorpusIntegrityError(
            "git mode needs either a reports directory or an analyzer command"
        )
    commits = _first_parent_commits(repo, limit)
    revisions = []
    for commit in commits:
        if reports_dir is not None:
            report_path = Path(reports_dir) / f"{commit.sha}.json"
            if not report_path.is_file():
                raise CorpusIntegrityError(
                    f"missing report for revision {commit.sha}: {report_path}"
                )
            report_bytes = report_path.read_bytes()
        else:
            report_bytes = _run_analyzer(repo, commit.sha, analyzer_cmd)
        try:
            parsed = parse_report(report_bytes, revision_index=commit.ordinal, type_map=type_map)
        except ReportError as exc:
            raise CorpusIntegrityError(f"report for revision {commit.sha}: {exc}") from None
        diff = _git_diff(repo, commit.sha)
        snapshot = _git_snapshot(repo, commit.sha, (w.file for w in parsed.warnings))
        revisions.append(
            RevisionAnalysis(
                commit=commit,
                warnings=tuple(parsed.warnings),
                diff_against_parent=diff,
                snapshot=snapshot,
            )
        )
    return revisions
