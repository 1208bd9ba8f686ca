"""Tool-composition programs: ``VAR=MODULE(key=value, ...)``, one step per line.

Programs are parsed into a :class:`ProgramAST`, rendered back to canonical
text, and executed against table-driven :class:`MockModule` fixtures that
stand in for the real vision models.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

from .errors import (
    DuplicateTarget,
    FixtureMiss,
    MissingArgKey,
    ProgramSyntaxError,
    UndefinedVariable,
    UnknownModule,
)

DEFAULT_INPUTS = ("IMAGE", "VIDEO")


@dataclass(frozen=True)
class VarRef:
    name: str


Value = Union[str, int, float, VarRef]


@dataclass(frozen=True)
class Step:
    target: str
    module: str
    args: tuple[tuple[str, Value], ...] = ()


@dataclass(frozen=True)
class ProgramAST:
    steps: tuple[Step, ...] = ()
    inputs: tuple[str, ...] = DEFAULT_INPUTS

    def module_sequence(self) -> list[str]:
        return [s.module for s in self.steps]


_TOKEN_SPEC = [
    ("WS", r"[ \t]+"),
    ("COMMENT", r"\#[^\n]*"),
    ("UPPER", r"[A-Z][A-Z0-9_]*(?![A-Za-z0-9_])"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("NUMBER", r"-?\d+(?:\.\d+)?(?![A-Za-z0-9_.])"),
    ("STRING", r"'(?:[^'\\\n]|\\.)*'"),
    ("EQ", r"="),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("COMMA", r","),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC))


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _lex_line(line: str, lineno: int) -> list[_Tok]:
    toks, pos = [], 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if not m:
            if line[pos] == "'":
                raise ProgramSyntaxError(lineno, pos + 1, "closing quote", line[pos:pos + 10])
            raise ProgramSyntaxError(lineno, pos + 1, "a token", line[pos])
        kind = m.lastgroup
        if kind == "COMMENT":
            break
        if kind != "WS":
            toks.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    return toks


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


class _LineParser:
    def __init__(self, toks: list[_Tok], lineno: int, line_len: int):
        self.toks, self.i, self.lineno, self.end_col = toks, 0, lineno, line_len + 1

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def expect(self, kinds: tuple[str, ...], what: str) -> _Tok:
        tok = self.peek()
        if tok is None or tok.kind not in kinds:
            col = tok.col if tok else self.end_col
            raise ProgramSyntaxError(self.lineno, col, what, tok.text if tok else "end of line")
        self.i += 1
        return tok

    def value(self) -> tuple[Value, _Tok]:
        tok = self.expect(("STRING", "NUMBER", "UPPER"), "a string, number or variable")
        if tok.kind == "STRING":
            return _unquote(tok.text), tok
        if tok.kind == "NUMBER":
            return (float(tok.text) if "." in tok.text else int(tok.text)), tok
        return VarRef(tok.text), tok

    def step(self) -> Step:
        target = self.expect(("UPPER",), "an upper-case variable name").text
        self.expect(("EQ",), "'='")
        module = self.expect(("UPPER",), "an upper-case module name").text
        self.expect(("LPAREN",), "'('")
        args: list[tuple[str, Value]] = []
        if self.peek() is not None and self.peek().kind == "RPAREN":
            self.i += 1
        else:
            while True:
                key = self.expect(("IDENT", "UPPER"), "an argument name").text
                self.expect(("EQ",), "'='")
                val, _ = self.value()
                args.append((key, val))
                sep = self.expect(("COMMA", "RPAREN"), "',' or ')'")
                if sep.kind == "RPAREN":
                    break
        if self.peek() is not None:
            tok = self.peek()
            raise ProgramSyntaxError(self.lineno, tok.col, "end of line", tok.text)
        return Step(target, module, tuple(args))


def parse_program(source: str, inputs: Sequence[str] = DEFAULT_INPUTS) -> ProgramAST:
    steps: list[Step] = []
    defined = set(inputs)
    for lineno, line in enumerate(source.splitlines(), 1):
        toks = _lex_line(line, lineno)
        if not toks:
            continue
        step = _LineParser(toks, lineno, len(line)).step()
        n = len(steps) + 1
        for _, val in step.args:
            if isinstance(val, VarRef) and val.name not in defined:
                raise UndefinedVariable(n, val.name)
        if step.target in defined:
            raise DuplicateTarget(n, step.target)
        defined.add(step.target)
        steps.append(step)
    return ProgramAST(tuple(steps), tuple(inputs))


def _render_number(x: int | float) -> str:
    if isinstance(x, bool):
        raise TypeError("booleans are not program values")
    if isinstance(x, int):
        return str(x)
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError(f"{x!r} cannot be written as a decimal numeral")
    text = format(Decimal(repr(x)), "f")
    return text if "." in text else text + ".0"


def _render_value(v: Value) -> str:
    if isinstance(v, VarRef):
        return v.name
    if isinstance(v, str):
        if len(("." + v + ".").splitlines()) != 1:
            raise ValueError("string literals cannot contain line breaks")
        return "'" + v.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return _render_number(v)


def render(ast: ProgramAST) -> str:
    """Canonical source: no spaces, one step per line."""
    lines = []
    for s in ast.steps:
        args = ",".join(f"{k}={_render_value(v)}" for k, v in s.args)
        lines.append(f"{s.target}={s.module}({args})")
    return "\n".join(lines)


def pipeline_equivalent(a: ProgramAST, b: ProgramAST) -> bool:
    """Same module-name sequence; variable names and arguments are ignored."""
    return a.module_sequence() == b.module_sequence()


def _canon(value: Any) -> Any:
    if isinstance(value, str):
        return value.strip()
    if isinstance(value, Mapping):
        return {str(k): _canon(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canon(v) for v in value]
    return value


def canonical_args(args: Mapping[str, Any]) -> str:
    return json.dumps(_canon(dict(args)), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(value: Any) -> str:
    blob = json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class MockModule:
    """Fixture-table stand-in for a model-backed module."""

    name: str
    required_keys: frozenset[str]
    fixture_table: Mapping[str, Any]

    @classmethod
    def from_entries(cls, name: str, entries: Iterable[Mapping[str, Any]],
                     required_keys: Iterable[str] | None = None) -> "MockModule":
        entries = list(entries)
        if required_keys is None:
            key_sets = [set(e["args"]) for e in entries]
            required = frozenset.intersection(*map(frozenset, key_sets)) if key_sets else frozenset()
        else:
            required = frozenset(required_keys)
            for e in entries:
                missing = required - set(e["args"])
                if missing:
                    raise MissingArgKey(f"{name}: fixture entry lacks required keys {sorted(missing)}")
        table = {canonical_args(e["args"]): e["output"] for e in entries}
        return cls(name, required, table)

    def __call__(self, args: Mapping[str, Any]) -> Any:
        missing = self.required_keys - set(args)
        if missing:
            raise MissingArgKey(f"{self.name}: missing argument(s) {sorted(missing)}")
        key = canonical_args(args)
        try:
            return self.fixture_table[key]
        except KeyError:
            raise FixtureMiss(f"{self.name}: no fixture for args {key}") from None


def load_fixtures(path: str | Path) -> dict[str, MockModule]:
    """Read ``{module_name: [{"args": {...}, "output": ...}, ...]}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return {name: MockModule.from_entries(name, entries) for name, entries in data.items()}


@dataclass(frozen=True)
class TraceEntry:
    step: int
    target: str
    module: str
    args: str
    output_digest: str


@dataclass
class Execution:
    bindings: dict[str, Any] = field(default_factory=dict)
    result: Any = None
    trace: list[TraceEntry] = field(default_factory=list)

    def module_sequence(self) -> list[str]:
        return [t.module for t in self.trace]


def execute(ast: ProgramAST, inputs: Mapping[str, Any], modules: Mapping[str, MockModule]) -> Execution:
    """Run steps in order; each binds its target to the fixture output."""
    missing = [n for n in ast.inputs if _uses(ast, n) and n not in inputs]
    if missing:
        raise UndefinedVariable(0, missing[0])
    for s in ast.steps:
        if s.module not in modules:
            raise UnknownModule(f"module {s.module!r} is not registered")
    env: dict[str, Any] = dict(inputs)
    run = Execution()
    for n, s in enumerate(ast.steps, 1):
        args = {k: (env[v.name] if isinstance(v, VarRef) else v) for k, v in s.args}
        out = modules[s.module](args)
        env[s.target] = out
        run.bindings[s.target] = out
        run.trace.append(TraceEntry(n, s.target, s.module, canonical_args(args), digest(out)))
    if ast.steps:
        run.result = run.bindings[ast.steps[-1].target]
    return run


def _uses(ast: ProgramAST, name: str) -> bool:
    return any(isinstance(v, VarRef) and v.name == name for s in ast.steps for _, v in s.args)
