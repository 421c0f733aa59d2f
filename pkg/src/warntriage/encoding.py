"""Deterministic warning encoder: two token channels hashed into one vector.

Text tokens come from the warning record (type, qualifier, procedure, file);
code tokens come from the warning's source context (buggy line, enclosing
block header, control-flow lines). The two channels hash into disjoint
halves of the output vector, so neither can disturb the other's slots.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from warntriage.core import ContractViolation, Warning
from warntriage.ingest.history import SourceSnapshot

DEFAULT_EMBED_DIM = 1024

CONTROL_KEYWORDS = ("if", "else", "for", "while", "switch", "return", "goto", "break", "continue")

_ALNUM_RUN = re.compile(r"[A-Za-z0-9]+")
_ALPHA_RUN = re.compile(r"[A-Za-z]+")
_CAMEL = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+")
_CONTROL_RE = re.compile(r"\b(?:" + "|".join(CONTROL_KEYWORDS) + r")\b")

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a; the stable token-to-slot hash."""
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase alphabetic tokens: splits on non-alphanumerics, digits,
    and camelCase boundaries; digit runs are dropped entirely."""
    out = []
    for run in _ALNUM_RUN.findall(text):
        for alpha in _ALPHA_RUN.findall(run):
            for part in _CAMEL.findall(alpha):
                out.append(part.lower())
    return out


def with_bigrams(tokens: list[str]) -> list[str]:
    return tokens + [f"{a}_{b}" for a, b in zip(tokens, tokens[1:])]


@dataclass
class TokenChannels:
    text_tokens: list[str] = field(default_factory=list)
    code_tokens: list[str] = field(default_factory=list)


def text_channel(warning: Warning) -> list[str]:
    """Tokens (plus per-field bigrams) from the four report fields."""
    out: list[str] = []
    for text in (warning.warning_type.value, warning.qualifier, warning.procedure, warning.file):
        out.extend(with_bigrams(tokenize(text)))
    return out


def _enclosing_open(lines: list[str], from_line: int) -> int | None:
    # Walk upward from the warning line; the first '{' with no matching '}'
    # below it opens the enclosing block.
    depth = 0
    for i in range(from_line, 0, -1):
        for ch in reversed(lines[i - 1]):
            if ch == "}":
                depth += 1
            elif ch == "{":
                if depth == 0:
                    return i
                depth -= 1
    return None


def _block_end(lines: list[str], open_line: int) -> int:
    depth = 0
    for i in range(open_line, len(lines) + 1):
        for ch in lines[i - 1]:
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return i
    return len(lines)


def code_context_lines(warning: Warning, snapshot: SourceSnapshot | None) -> list[str]:
    """Source lines feeding the code channel: the buggy line, the enclosing
    block's header, and every control-keyword line inside that block.

    Degrades to empty when the file or line is unavailable.
    """
    if snapshot is None:
        return []
    lines = snapshot.lines(warning.file)
    if lines is None or warning.line > len(lines):
        return []

    picked: list[int] = [warning.line]
    open_line = _enclosing_open(lines, warning.line)
    if open_line is not None:
        if lines[open_line - 1].strip() == "{":
            # brace on its own line: the construct header sits above it
            j = open_line - 1
            while j >= 1 and not lines[j - 1].strip():
                j -= 1
            if j >= 1:
                picked.append(j)
        picked.append(open_line)
        end_line = _block_end(lines, open_line)
        for i in range(open_line, end_line + 1):
            if _CONTROL_RE.search(lines[i - 1]):
                picked.append(i)

    seen: set[int] = set()
    out = []
    for i in picked:
        if i not in seen:
            seen.add(i)
            out.append(lines[i - 1])
    return out


def code_channel(warning: Warning, snapshot: SourceSnapshot | None) -> list[str]:
    """Tokens (plus per-line bigrams) from the warning's source context."""
    out: list[str] = []
    for line in code_context_lines(warning, snapshot):
        out.extend(with_bigrams(tokenize(line)))
    return out


def tokens_from_lines(lines: list[str]) -> list[str]:
    """Code-channel tokens for pre-extracted context lines."""
    out: list[str] = []
    for line in lines:
        out.extend(with_bigrams(tokenize(line)))
    return out


@dataclass
class EmbeddingVector:
    values: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def embed(channels: TokenChannels, dim: int = DEFAULT_EMBED_DIM) -> EmbeddingVector:
    """Hash token counts into an L2-normalized vector of width `dim`.

    Text tokens own slots [0, dim/2), code tokens [dim/2, dim); the slot of
    a token is fnv1a64("<channel>:<token>") modulo the half width.
    """
    if dim < 2 or dim % 2 != 0:
        raise ContractViolation(f"embedding dimension must be even and >= 2, got {dim}")
    half = dim // 2
    values = np.zeros(dim, dtype=np.float64)
    for token in channels.text_tokens:
        values[fnv1a64(f"text:{token}".encode("utf-8")) % half] += 1.0
    for token in channels.code_tokens:
        values[half + fnv1a64(f"code:{token}".encode("utf-8")) % half] += 1.0
    norm = np.linalg.norm(values)
    if norm > 0:
        values /= norm
    return EmbeddingVector(values=values)


def channels_for(
    warning: Warning,
    snapshot: SourceSnapshot | None = None,
    code_lines: list[str] | None = None,
) -> TokenChannels:
    """Build both channels; stored context lines win over a live snapshot."""
    if code_lines is not None:
        code = tokens_from_lines(code_lines)
    else:
        code = code_channel(warning, snapshot)
    return TokenChannels(text_tokens=text_channel(warning), code_tokens=code)


def encode_warning(
    warning: Warning,
    snapshot: SourceSnapshot | None = None,
    dim: int = DEFAULT_EMBED_DIM,
    code_lines: list[str] | None = None,
) -> EmbeddingVector:
    return embed(channels_for(warning, snapshot, code_lines), dim)
