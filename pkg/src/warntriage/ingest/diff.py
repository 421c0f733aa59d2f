"""Unified diff parsing and rendering.

Handles plain `diff -u` output as well as git patches (the extended header
lines are tolerated and dropped). Added lines are numbered in the new file,
removed lines in the old file; hunk line counts are validated against the
declared ranges.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from warntriage.core import TriageError

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")

# git extended header lines that carry no hunk content
_SKIP_PREFIXES = (
    "diff ",
    "index ",
    "old mode",
    "new mode",
    "new file mode",
    "deleted file mode",
    "similarity index",
    "dissimilarity index",
    "rename from",
    "rename to",
    "copy from",
    "copy to",
    "Binary files",
    "GIT binary patch",
)

DEV_NULL = "/dev/null"


class DiffParseError(TriageError):
    """Unified diff text that violates its own declared structure."""


@dataclass(frozen=True)
class DiffLine:
    tag: str  # " " context, "+" added, "-" removed
    text: str
    no_newline: bool = False


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: tuple[DiffLine, ...]

    def added_lines(self) -> list[tuple[int, str]]:
        """(new-file line number, text) for every added line."""
        out = []
        new_no = self.new_start
        for line in self.lines:
            if line.tag == "+":
                out.append((new_no, line.text))
                new_no += 1
            elif line.tag == " ":
                new_no += 1
        return out

    def removed_lines(self) -> list[tuple[int, str]]:
        """(old-file line number, text) for every removed line."""
        out = []
        old_no = self.old_start
        for line in self.lines:
            if line.tag == "-":
                out.append((old_no, line.text))
                old_no += 1
            elif line.tag == " ":
                old_no += 1
        return out


@dataclass(frozen=True)
class FileDiff:
    old_path: str
    new_path: str
    hunks: tuple[Hunk, ...]

    @property
    def is_deleted(self) -> bool:
        return self.new_path == DEV_NULL

    @property
    def is_added(self) -> bool:
        return self.old_path == DEV_NULL

    @property
    def path(self) -> str:
        """Repository-relative display path (old path for deletions)."""
        return self.old_path if self.is_deleted else self.new_path

    def touches(self, path: str) -> bool:
        return path in (self.old_path, self.new_path)


@dataclass(frozen=True)
class DiffSet:
    files: tuple[FileDiff, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return bool(self.files)

    def hunks_for(self, path: str) -> list[Hunk]:
        out: list[Hunk] = []
        for fd in self.files:
            if fd.touches(path):
                out.extend(fd.hunks)
        return out

    def deleted_files(self) -> set[str]:
        return {fd.old_path for fd in self.files if fd.is_deleted}


def _strip_label(label: str, prefix: str) -> str:
    # "--- a/src/x.c\t2024-01-01 ..." -> "src/x.c"; /dev/null passes through
    label = label.split("\t", 1)[0].strip()
    if label == DEV_NULL:
        return label
    if label.startswith(prefix):
        return label[len(prefix):]
    return label


def parse_unified_diff(data: bytes | str) -> DiffSet:
    """Parse unified diff text; raises DiffParseError with a line number."""
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    lines = data.split("\n")
    # split("\n") leaves a trailing empty element when the text ends with \n
    if lines and lines[-1] == "":
        lines.pop()

    files: list[FileDiff] = []
    current_old: str | None = None
    current_new: str | None = None
    current_hunks: list[Hunk] = []

    def flush_file() -> None:
        nonlocal current_old, current_new, current_hunks
        if current_old is not None and current_new is not None:
            files.append(FileDiff(current_old, current_new, tuple(current_hunks)))
        current_old = current_new = None
        current_hunks = []

    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        if line.startswith("--- "):
            flush_file()
            if i + 1 >= n or not lines[i + 1].startswith("+++ "):
                raise DiffParseError(f"line {i + 2}: expected '+++' after '---'")
            current_old = _strip_label(line[4:], "a/")
            current_new = _strip_label(lines[i + 1][4:], "b/")
            i += 2
            continue
        m = _HUNK_RE.match(line)
        if m:
            if current_old is None:
                raise DiffParseError(f"line {i + 1}: hunk header before file header")
            old_start = int(m.group(1))
            old_len = 1 if m.group(2) is None else int(m.group(2))
            new_start = int(m.group(3))
            new_len = 1 if m.group(4) is None else int(m.group(4))
            hunk_lines: list[DiffLine] = []
            seen_old = seen_new = 0
            i += 1
            while i < n and (seen_old < old_len or seen_new < new_len):
                body = lines[i]
                if body.startswith("\\"):
                    # "\ No newline at end of file" annotates the previous line
                    if hunk_lines:
                        prev = hunk_lines[-1]
                        hunk_lines[-1] = DiffLine(prev.tag, prev.text, no_newline=True)
                    i += 1
                    continue
                tag = body[:1] or " "
                text = body[1:]
                if tag == " ":
                    seen_old += 1
                    seen_new += 1
                elif tag == "-":
                    seen_old += 1
                elif tag == "+":
                    seen_new += 1
                else:
                    raise DiffParseError(f"line {i + 1}: unexpected line inside hunk: {body!r}")
                hunk_lines.append(DiffLine(tag, text))
                i += 1
            if seen_old != old_len or seen_new != new_len:
                raise DiffParseError(
                    f"line {i}: hunk ended with {seen_old}/{old_len} old and "
                    f"{seen_new}/{new_len} new lines"
                )
            if i < n and lines[i].startswith("\\"):
                if hunk_lines:
                    prev = hunk_lines[-1]
                    hunk_lines[-1] = DiffLine(prev.tag, prev.text, no_newline=True)
                i += 1
            current_hunks.append(Hunk(old_start, old_len, new_start, new_len, tuple(hunk_lines)))
            continue
        if line == "" or line.startswith(_SKIP_PREFIXES):
            i += 1
            continue
        raise DiffParseError(f"line {i + 1}: unrecognized diff line: {line!r}")

    flush_file()
    return DiffSet(tuple(files))


def render_unified_diff(diff: DiffSet) -> str:
    """Canonical unified-diff text; parse(render(d)) == d."""
    out: list[str] = []
    for fd in diff.files:
        old_label = DEV_NULL if fd.old_path == DEV_NULL else f"a/{fd.old_path}"
        new_label = DEV_NULL if fd.new_path == DEV_NULL else f"b/{fd.new_path}"
        out.append(f"--- {old_label}")
        out.append(f"+++ {new_label}")
        for hunk in fd.hunks:
            out.append(
                f"@@ -{hunk.old_start},{hunk.old_len} +{hunk.new_start},{hunk.new_len} @@"
            )
            for line in hunk.lines:
                out.append(f"{line.tag}{line.text}")
                if line.no_newline:
                    out.append("\\ No newline at end of file")
    if not out:
        return ""
    return "\n".join(out) + "\n"
