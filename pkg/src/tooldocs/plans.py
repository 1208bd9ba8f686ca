"""Command plans: line normalization and extraction from completion text."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ConfigError, EmptyLine

ANSWER_MARKER = "Commands:"
MATCH_MODES = ("exact", "placeholder-wildcard")

_CONTINUATION = re.compile(r"(?<!\\)\\[ \t]*\r?\n")
_WS = re.compile(r"\s+")
_BULLET = re.compile(r"^(?:(?:[-*+•]|\d+[.)])\s+)+")
_PLACEHOLDER = re.compile(r"[A-Z][A-Z0-9_]+")


@dataclass(frozen=True)
class CommandPlan:
    lines: tuple[str, ...] = ()
    raw_completion: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lines", tuple(self.lines))
        for line in self.lines:
            if not line.strip():
                raise EmptyLine("command plans cannot contain blank lines")

    @classmethod
    def from_lines(cls, lines) -> "CommandPlan":
        return cls(lines=tuple(normalize_command(x) for x in lines))

    def __len__(self) -> int:
        return len(self.lines)

    def text(self) -> str:
        return "\n".join(self.lines)


def normalize_command(line: str, mode: str = "exact") -> str:
    """Collapse whitespace and join backslash continuations.

    Case and flag syntax are left alone. In placeholder-wildcard mode this
    is the same string; wildcards are resolved token-wise by
    :func:`line_tokens`.
    """
    if mode not in MATCH_MODES:
        raise ConfigError(f"unknown match mode {mode!r}")
    joined = _CONTINUATION.sub(" ", line)
    if joined.rstrip().endswith("\\") and not joined.rstrip().endswith("\\\\"):
        joined = joined.rstrip()[:-1]
    out = _WS.sub(" ", joined).strip()
    if not out:
        raise EmptyLine("cannot normalize an empty command line")
    return out


def is_placeholder(token: str) -> bool:
    """ALL-CAPS standalone words of length >= 2 (NAME, LOC, PROJ_ID)."""
    return bool(_PLACEHOLDER.fullmatch(token))


def line_tokens(line: str, mode: str, *, gold: bool) -> tuple[str | None, ...]:
    """Split a normalized line; ``None`` marks a wildcard slot (gold side only)."""
    tokens = line.split(" ")
    if mode == "placeholder-wildcard" and gold:
        return tuple(None if is_placeholder(t) else t for t in tokens)
    return tuple(tokens)


def lines_match(pred: str, gold: str, mode: str) -> bool:
    if mode == "exact":
        return pred == gold
    p = line_tokens(pred, mode, gold=False)
    g = line_tokens(gold, mode, gold=True)
    return len(p) == len(g) and all(gt is None or gt == pt for pt, gt in zip(p, g))


def _join_continuations(lines: list[str]) -> list[str]:
    out: list[str] = []
    pending = ""
    for line in lines:
        stripped = line.rstrip()
        if stripped.endswith("\\") and not stripped.endswith("\\\\"):
            pending += stripped[:-1] + " "
            continue
        out.append(pending + line)
        pending = ""
    if pending:
        out.append(pending)
    return out


def extract_plan(completion: str) -> CommandPlan:
    """Pull command lines out of planner output.

    Text after the last line starting with the answer marker is used (the
    whole text when there is no marker). Code fences, blank lines and list
    bullets or numbering are dropped; backslash continuations are joined.
    """
    lines = completion.splitlines()
    start = 0
    for i, line in enumerate(lines):
        if line.lstrip().startswith(ANSWER_MARKER):
            start = i
    if lines and lines[start].lstrip().startswith(ANSWER_MARKER):
        head = lines[start].lstrip()[len(ANSWER_MARKER):]
        lines = [head] + lines[start + 1:]

    kept: list[str] = []
    for line in _join_continuations(lines):
        s = line.strip()
        if not s or s.startswith("```"):
            continue
        s = _BULLET.sub("", s).strip()
        if s and not s.startswith("```"):
            kept.append(_WS.sub(" ", s))

    warnings: tuple[str, ...] = ()
    if not kept:
        warnings = ("no command lines found in completion",)
    return CommandPlan(lines=tuple(kept), raw_completion=completion, warnings=warnings)
