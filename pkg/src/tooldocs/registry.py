"""Tool specifications, their documentation, and demo pools."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DuplicateToolId, RegistryError, RegistryFrozen, UnknownToolId

DOC_STYLES = ("signature-first", "prose-first")


@dataclass(frozen=True)
class DemoExample:
    """An <instruction, plan> pair. ``plan`` is command lines or program source."""

    instruction: str
    plan: str

    @classmethod
    def from_dict(cls, d: dict) -> "DemoExample":
        plan = d["plan"]
        if isinstance(plan, list):
            plan = "\n".join(plan)
        return cls(instruction=d["instruction"], plan=plan)


@dataclass(frozen=True)
class ToolSpec:
    tool_id: str
    name: str
    signature: str
    doc_text: str
    demo_pool: tuple[DemoExample, ...] = ()

    def __post_init__(self) -> None:
        if not self.tool_id:
            raise RegistryError("tool_id must be non-empty")
        # lists from callers are frozen so equality and hashing behave
        object.__setattr__(self, "demo_pool", tuple(self.demo_pool))

    @classmethod
    def from_dict(cls, d: dict) -> "ToolSpec":
        return cls(
            tool_id=d["tool_id"],
            name=d.get("name") or d["tool_id"],
            signature=d.get("signature", ""),
            doc_text=d.get("doc_text", ""),
            demo_pool=tuple(DemoExample.from_dict(x) for x in d.get("demos", ())),
        )

    def to_dict(self) -> dict:
        return {
            "tool_id": self.tool_id,
            "name": self.name,
            "signature": self.signature,
            "doc_text": self.doc_text,
            "demos": [asdict(d) for d in self.demo_pool],
        }


def render_spec(spec: ToolSpec, style: str = "signature-first") -> str:
    """Render one tool's documentation. Demos never appear in the output."""
    if style == "signature-first":
        parts = [spec.signature, spec.doc_text]
    elif style == "prose-first":
        parts = [spec.doc_text, f"Usage: {spec.signature}" if spec.signature else ""]
    else:
        raise ValueError(f"unknown doc style {style!r}; expected one of {DOC_STYLES}")
    return "\n".join(p.strip() for p in parts if p and p.strip())


@dataclass
class Registry:
    """Insertion-ordered tool store, frozen once a run starts.

    Task-level demos (whole-question examples, not tied to a single tool)
    live in ``task_demos``, separate from each tool's own demo pool.
    """

    _tools: dict[str, ToolSpec] = field(default_factory=dict)
    task_demos: tuple[DemoExample, ...] = ()
    frozen: bool = False

    def register_tool(self, spec: ToolSpec) -> str:
        if self.frozen:
            raise RegistryFrozen("registry is frozen; build it before the run starts")
        if spec.tool_id in self._tools:
            raise DuplicateToolId(f"tool {spec.tool_id!r} is already registered")
        self._tools[spec.tool_id] = spec
        return spec.tool_id

    def set_task_demos(self, demos: Iterable[DemoExample]) -> None:
        if self.frozen:
            raise RegistryFrozen("registry is frozen; build it before the run starts")
        self.task_demos = tuple(demos)

    def freeze(self) -> "Registry":
        self.frozen = True
        return self

    def lookup(self, tool_id: str) -> ToolSpec:
        try:
            return self._tools[tool_id]
        except KeyError:
            raise UnknownToolId(f"unknown tool {tool_id!r}") from None

    def render_doc(self, tool_id: str, style: str = "signature-first") -> str:
        return render_spec(self.lookup(tool_id), style)

    def __contains__(self, tool_id: object) -> bool:
        return tool_id in self._tools

    def __iter__(self) -> Iterator[ToolSpec]:
        return iter(self._tools.values())

    def __len__(self) -> int:
        return len(self._tools)

    def tool_ids(self) -> list[str]:
        return list(self._tools)

    @classmethod
    def from_specs(cls, specs: Iterable[ToolSpec]) -> "Registry":
        reg = cls()
        for spec in specs:
            reg.register_tool(spec)
        return reg


def load_registry(path: str | Path) -> Registry:
    """Read a tool corpus file (one JSON object per line)."""
    reg = Registry()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                reg.register_tool(ToolSpec.from_dict(json.loads(line)))
            except (KeyError, json.JSONDecodeError) as exc:
                raise RegistryError(f"{path}:{lineno}: malformed tool record ({exc})") from exc
    return reg


def dump_registry(registry: Registry, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for spec in registry:
            fh.write(json.dumps(spec.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
