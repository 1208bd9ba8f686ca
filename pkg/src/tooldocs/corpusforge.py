"""Turn real CLI documentation into an unseen toolset by renaming.

Pipeline: raw HTML/text pages -> :func:`strip_markup` -> :func:`apply_rename`
-> :func:`check_leakage`, then :func:`build_benchmark` assembles renamed
tasks, demos and tool docs into a :class:`Benchmark`.
"""

from __future__ import annotations

import hashlib
import html
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InvalidEncoding, InvalidGoldPlan, InvalidRenameMap, LeakageDetected
from .plans import CommandPlan, extract_plan, normalize_command
from .registry import DemoExample, Registry, ToolSpec

WORD_CHARS = "A-Za-z0-9_-"
DEFAULT_FORBIDDEN = frozenset({"gcloud", "gsutil"})
# generic utilities a gold plan may call besides the renamed CLI
DEFAULT_PASSTHROUGH = frozenset(
    {"ffmpeg", "touch", "mkdir", "cp", "mv", "rm", "ls", "cat", "echo", "curl", "wget",
     "tar", "unzip", "zip", "python", "python3", "pip", "docker", "git", "ssh", "scp",
     "export", "cd", "chmod", "openssl", "kubectl", "bq"}
)
RAW_SUFFIXES = (".html", ".htm", ".txt")

_HTML_ELEMENTS = (
    "a abbr address area article aside audio b base bdi bdo blockquote body br button "
    "canvas caption cite code col colgroup data datalist dd del details dfn dialog div dl "
    "dt em embed fieldset figcaption figure font footer form h1 h2 h3 h4 h5 h6 head header "
    "hgroup hr html i iframe img input ins kbd label legend li link main map mark menu meta "
    "meter nav noscript object ol optgroup option output p param picture pre progress q rp "
    "rt ruby s samp section select small source span strong sub summary sup table tbody td "
    "template textarea tfoot th thead time title tr track tt u ul var video wbr center"
).split()
_BLOCK_ELEMENTS = set(
    "address article aside blockquote body br dd details dialog div dl dt fieldset "
    "figcaption figure footer form h1 h2 h3 h4 h5 h6 head header hgroup hr html li main "
    "nav ol p pre section summary table tbody td tfoot th thead title tr ul center".split()
)
_TAG = re.compile(
    r"</?(%s)\b(?:[^<>\"']|\"[^\"]*\"|'[^']*')*/?>" % "|".join(sorted(_HTML_ELEMENTS, key=len, reverse=True)),
    re.IGNORECASE,
)
_DROP = re.compile(
    r"<!--.*?-->|<!doctype[^>]*>|<\?xml[^>]*>|<(script|style)\b[^>]*>.*?</\1\s*>",
    re.IGNORECASE | re.DOTALL,
)
_HSPACE = re.compile(r"[^\S\n]+")


def _normalize_ws(text: str) -> str:
    lines = (_HSPACE.sub(" ", ln).strip() for ln in text.split("\n"))
    return "\n".join(ln for ln in lines if ln)


def _has_markup(text: str) -> bool:
    return bool(_TAG.search(text) or _DROP.search(text))


def _strip_once(text: str) -> str:
    if not _has_markup(text):
        return _normalize_ws(text.replace("\r\n", "\n").replace("\r", "\n"))
    text = _DROP.sub(" ", text)
    # source newlines inside HTML are plain whitespace; block tags make breaks
    text = re.sub(r"\s", " ", text)

    def tag_sub(m: re.Match) -> str:
        return "\n" if m.group(1).lower() in _BLOCK_ELEMENTS else ""

    text = _TAG.sub(tag_sub, text)
    text = html.unescape(text).replace("\xa0", " ")
    return _normalize_ws(text)


def strip_markup(raw: str | bytes) -> str:
    """Remove HTML tags, keeping all text including link anchors and boilerplate.

    Only real HTML element names count as tags, so usage placeholders such
    as ``<VALUE>`` in plain text survive. Entities are decoded only when the
    input carries markup. The result is a fixed point: stripping it again
    changes nothing.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidEncoding(f"input is not valid UTF-8: {exc}") from exc
    text = raw
    for _ in range(16):
        nxt = _strip_once(text)
        if nxt == text:
            break
        text = nxt
    return text


@dataclass(frozen=True)
class RenameMap:
    """Ordered (source, target) token substitutions."""

    entries: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        entries = tuple((str(s), str(t)) for s, t in self.entries)
        seen: dict[str, str] = {}
        for src, tgt in entries:
            if not src or not tgt:
                raise InvalidRenameMap("rename entries must be non-empty")
            if src != src.strip() or tgt != tgt.strip():
                raise InvalidRenameMap(f"entry {src!r}->{tgt!r} has surrounding whitespace")
            if src in seen and seen[src] != tgt:
                raise InvalidRenameMap(f"{src!r} maps to both {seen[src]!r} and {tgt!r}")
            seen[src] = tgt
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[str]]) -> "RenameMap":
        return cls(tuple((p[0], p[1]) for p in pairs))

    @classmethod
    def load(cls, path: str | Path) -> "RenameMap":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, list) or not all(isinstance(p, list) and len(p) == 2 for p in data):
            raise InvalidRenameMap(f"{path}: expected a JSON array of [source, target] pairs")
        return cls.from_pairs(data)

    def ordered(self) -> list[tuple[str, str]]:
        """Longest source first; ties keep file order."""
        idx = {e: i for i, e in reversed(list(enumerate(self.entries)))}
        uniq = list(dict.fromkeys(self.entries))
        return sorted(uniq, key=lambda e: (-len(e[0]), idx[e]))

    def digest(self) -> str:
        blob = json.dumps([list(e) for e in self.entries], ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def sources(self) -> set[str]:
        return {s for s, _ in self.entries}


def _bounded(token: str) -> re.Pattern:
    return re.compile(rf"(?<![{WORD_CHARS}]){re.escape(token)}(?![{WORD_CHARS}])")


def apply_rename(text: str, rename_map: RenameMap) -> str:
    """Substitute every word-bounded source token, longest source first.

    Matches are located on the original text only, so substituted output
    is never matched again.
    """
    if not rename_map.entries or not text:
        return text
    claimed: list[tuple[int, int, str]] = []
    taken = bytearray(len(text))
    for src, tgt in rename_map.ordered():
        for m in _bounded(src).finditer(text):
            a, b = m.span()
            if any(taken[a:b]):
                continue
            taken[a:b] = b"\x01" * (b - a)
            claimed.append((a, b, tgt))
    if not claimed:
        return text
    claimed.sort()
    out, pos = [], 0
    for a, b, tgt in claimed:
        out.append(text[pos:a])
        out.append(tgt)
        pos = b
    out.append(text[pos:])
    return "".join(out)


@dataclass(frozen=True)
class Violation:
    token: str
    offset: int  # UTF-8 byte offset


def check_leakage(text: str, forbidden: Iterable[str] = DEFAULT_FORBIDDEN) -> list[Violation]:
    hits: list[tuple[int, str]] = []
    for tok in sorted(set(forbidden)):
        if tok:
            hits.extend((m.start(), tok) for m in _bounded(tok).finditer(text))
    hits.sort()
    return [Violation(tok, len(text[:i].encode("utf-8"))) for i, tok in hits]


@dataclass(frozen=True)
class Task:
    task_id: str
    question: str
    gold_plan: CommandPlan

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "question": self.question, "gold_plan": list(self.gold_plan.lines)}

    @classmethod
    def from_dict(cls, d: dict) -> "Task":
        return cls(d["task_id"], d["question"], CommandPlan.from_lines(d["gold_plan"]))


@dataclass(frozen=True)
class Benchmark:
    tasks: tuple[Task, ...]
    demo_pool: tuple[DemoExample, ...] = ()
    metadata: dict = field(default_factory=dict)

    def gold_by_id(self) -> dict[str, CommandPlan]:
        return {t.task_id: t.gold_plan for t in self.tasks}

    def to_dict(self) -> dict:
        return {
            "tasks": [t.to_dict() for t in self.tasks],
            "demo_pool": [{"instruction": d.instruction, "plan": d.plan} for d in self.demo_pool],
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Benchmark":
        return cls(
            tasks=tuple(Task.from_dict(t) for t in d["tasks"]),
            demo_pool=tuple(DemoExample.from_dict(x) for x in d.get("demo_pool", ())),
            metadata=dict(d.get("metadata", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Benchmark":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class SourceTask:
    """A task written in the original (source) vocabulary."""

    task_id: str
    question: str
    gold_commands: tuple[str, ...]

    @classmethod
    def from_dict(cls, d: dict) -> "SourceTask":
        return cls(str(d["task_id"]), d["question"], tuple(d["gold_commands"]))


def load_source_tasks(path: str | Path) -> tuple[list[SourceTask], list[DemoExample]]:
    """Read ``{"tasks": [...], "demos": [...]}`` in source vocabulary."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    tasks = [SourceTask.from_dict(t) for t in data["tasks"]]
    demos = [DemoExample.from_dict(d) for d in data.get("demos", ())]
    return tasks, demos


def _extract_signature(tool_id: str, text: str) -> str:
    """First invocation line under SYNOPSIS, else the first one anywhere."""
    lines = text.split("\n")
    starts = [i + 1 for i, ln in enumerate(lines) if ln.strip().upper() == "SYNOPSIS"] + [0]
    for start in starts:
        for line in lines[start:]:
            if line.startswith(tool_id + " ") and " - " not in line:
                return line
    return tool_id


def ingest_corpus(corpus_dir: str | Path) -> Registry:
    """Read one raw page per tool; the filename stem is the source tool_id."""
    corpus_dir = Path(corpus_dir)
    reg = Registry()
    for path in sorted(corpus_dir.iterdir()):
        if path.suffix.lower() not in RAW_SUFFIXES or not path.is_file():
            continue
        reg.register_tool(spec_from_page(path.stem, path.read_bytes()))
    return reg


def spec_from_page(tool_id: str, raw: str | bytes) -> ToolSpec:
    text = strip_markup(raw)
    return ToolSpec(tool_id=tool_id, name=tool_id, signature=_extract_signature(tool_id, text), doc_text=text)


def _normalize_gold(task_id: str, commands: Sequence[str]) -> CommandPlan:
    lines: list[str] = []
    for raw in commands:
        if raw.strip():
            lines.append(normalize_command(raw))
    if len(lines) < 2:
        raise InvalidGoldPlan(f"task {task_id}: gold plan needs at least 2 commands, got {len(lines)}",
                              task_id=task_id)
    return CommandPlan(tuple(lines))


def _check(text: str, forbidden, where: str) -> None:
    v = check_leakage(text, forbidden)
    if v:
        raise LeakageDetected(v, where)


def build_benchmark(
    source_tasks: Sequence[SourceTask],
    rename_map: RenameMap,
    registry: Registry,
    *,
    demos: Sequence[DemoExample] = (),
    forbidden: Iterable[str] = DEFAULT_FORBIDDEN,
    passthrough: Iterable[str] = DEFAULT_PASSTHROUGH,
    source_corpus: str = "",
    seed: int = 0,
) -> tuple[Benchmark, Registry]:
    """Rename tasks, demos and tool docs; return the benchmark and renamed registry.

    Raises LeakageDetected if any renamed artifact still carries a
    forbidden token, InvalidGoldPlan for plans with fewer than two commands.
    """
    forbidden = frozenset(forbidden)
    renamed = Registry()
    for spec in registry:
        new = ToolSpec(
            tool_id=apply_rename(spec.tool_id, rename_map),
            name=apply_rename(spec.name, rename_map),
            signature=apply_rename(spec.signature, rename_map),
            doc_text=apply_rename(spec.doc_text, rename_map),
            demo_pool=tuple(DemoExample(apply_rename(d.instruction, rename_map), apply_rename(d.plan, rename_map))
                            for d in spec.demo_pool),
        )
        for part in (new.tool_id, new.name, new.signature, new.doc_text):
            _check(part, forbidden, f"tool {new.tool_id}")
        for d in new.demo_pool:
            _check(d.instruction + "\n" + d.plan, forbidden, f"demo of tool {new.tool_id}")
        renamed.register_tool(new)

    leading = {tid.split(" ", 1)[0] for tid in renamed.tool_ids()} | set(passthrough)
    tasks: list[Task] = []
    seen: set[str] = set()
    for st in source_tasks:
        if st.task_id in seen:
            raise InvalidGoldPlan(f"duplicate task_id {st.task_id!r}", task_id=st.task_id)
        seen.add(st.task_id)
        gold = _normalize_gold(st.task_id, st.gold_commands)
        gold = CommandPlan(tuple(apply_rename(line, rename_map) for line in gold.lines))
        question = apply_rename(st.question, rename_map)
        _check(question, forbidden, f"question of task {st.task_id}")
        for line in gold.lines:
            _check(line, forbidden, f"gold plan of task {st.task_id}")
            head = line.split(" ", 1)[0]
            if head not in leading:
                raise InvalidGoldPlan(f"task {st.task_id}: command {head!r} is neither a tool nor a passthrough",
                                      task_id=st.task_id)
        tasks.append(Task(st.task_id, question, gold))

    demo_pool = []
    for i, d in enumerate(demos):
        plan = extract_plan(d.plan)
        nd = DemoExample(apply_rename(d.instruction, rename_map), apply_rename(plan.text(), rename_map))
        _check(nd.instruction + "\n" + nd.plan, forbidden, f"demo {i}")
        demo_pool.append(nd)

    metadata = {
        "source_corpus": source_corpus,
        "rename_map_digest": rename_map.digest(),
        "creation_seed": seed,
        "n_tools": len(renamed),
    }
    renamed.set_task_demos(demo_pool)
    return Benchmark(tuple(tasks), tuple(demo_pool), metadata), renamed


def forge(
    corpus_dir: str | Path,
    tasks_path: str | Path,
    rename_map: RenameMap,
    *,
    forbidden: Iterable[str] = DEFAULT_FORBIDDEN,
    seed: int = 0,
) -> tuple[Benchmark, Registry]:
    registry = ingest_corpus(corpus_dir)
    tasks, demos = load_source_tasks(tasks_path)
    return build_benchmark(tasks, rename_map, registry, demos=demos, forbidden=forbidden,
                           source_corpus=Path(corpus_dir).name, seed=seed)
