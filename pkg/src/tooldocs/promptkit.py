"""Prompt assembly for the docs x demos experimental grid."""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import ConfigError, NotEnoughDemos, TemplateError
from .plans import ANSWER_MARKER
from .registry import DemoExample, Registry
from .retriever import RetrievalConfig, RetrievalIndex, query, truncate_words, word_count

SECTION_LABELS = ("system", "documentation", "examples", "question", "answer_format")
TEMPLATE_VERSION = "cli-plan-v1"

DEFAULT_TEMPLATE = f"""\
## system
You are a planner for a cloud command-line toolkit. Write the shell commands that accomplish the user's request.
## documentation
Documentation of tools that may be relevant:
{{documentation}}
## examples
Examples of questions and the commands that answer them:
{{examples}}
## question
Question: {{question}}
## answer_format
Write one command per line, in execution order, after the line "{ANSWER_MARKER}".
{ANSWER_MARKER}
"""

_HEADER = re.compile(r"^## (\w+)\s*$")


@dataclass(frozen=True)
class Template:
    """Per-section format strings, parsed from ``## <label>`` headed blocks."""

    sections: dict[str, str]
    source: str
    version: str = TEMPLATE_VERSION

    @classmethod
    def parse(cls, text: str, version: str = TEMPLATE_VERSION) -> "Template":
        sections: dict[str, list[str]] = {}
        current = None
        for line in text.splitlines():
            m = _HEADER.match(line)
            if m:
                current = m.group(1)
                if current not in SECTION_LABELS:
                    raise TemplateError(f"unknown template section {current!r}")
                if current in sections:
                    raise TemplateError(f"section {current!r} defined twice")
                sections[current] = []
            elif current is None:
                if line.strip():
                    raise TemplateError("template text before the first '## <section>' header")
            else:
                sections[current].append(line)
        missing = [s for s in SECTION_LABELS if s not in sections]
        if missing:
            raise TemplateError(f"template is missing sections {missing}")
        return cls({k: "\n".join(v).strip("\n") for k, v in sections.items()}, text, version)

    @classmethod
    def load(cls, path: str | Path) -> "Template":
        return cls.parse(Path(path).read_text(encoding="utf-8"), version=f"file:{Path(path).name}")

    def digest(self) -> str:
        return hashlib.sha256(self.source.encode("utf-8")).hexdigest()

    def render_section(self, label: str, body: str) -> str:
        try:
            return self.sections[label].format_map({label: body})
        except (KeyError, IndexError, ValueError) as exc:
            raise TemplateError(f"section {label!r}: bad placeholder ({exc})") from exc


DEFAULT = Template.parse(DEFAULT_TEMPLATE)


@dataclass(frozen=True)
class PromptCondition:
    use_docs: bool = True
    shots: int = 0
    demo_seed: int = 0
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)

    def __post_init__(self) -> None:
        if self.shots < 0:
            raise ConfigError("shots must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Prompt:
    sections: tuple[tuple[str, str], ...]
    rendered: str
    task_id: str
    condition: PromptCondition
    retrieved_doc_ids: tuple[str, ...] = ()
    demo_ids: tuple[int, ...] = ()
    warnings: tuple[str, ...] = ()

    def section(self, label: str) -> str | None:
        for name, body in self.sections:
            if name == label:
                return body
        return None

    @property
    def provenance(self) -> dict:
        return {
            "task_id": self.task_id,
            "condition": self.condition.to_dict(),
            "retrieved_doc_ids": list(self.retrieved_doc_ids),
            "demo_ids": list(self.demo_ids),
        }

    def digest(self) -> str:
        return hashlib.sha256(self.rendered.encode("utf-8")).hexdigest()


def select_demos(pool: Sequence[DemoExample], shots: int, seed: int) -> list[int]:
    """Indices of ``shots`` demos sampled uniformly without replacement."""
    if shots > len(pool):
        raise NotEnoughDemos(f"asked for {shots} demos but the pool has {len(pool)}")
    if shots <= 0:
        return []
    return random.Random(seed).sample(range(len(pool)), shots)


def render_demo(demo: DemoExample) -> str:
    return f"Question: {demo.instruction}\n{ANSWER_MARKER}\n{demo.plan}"


def render_sections(sections: Sequence[tuple[str, str]], template: Template = DEFAULT) -> str:
    return "\n\n".join(template.render_section(label, body) for label, body in sections) + "\n"


def documentation_body(
    question: str, registry: Registry, index: RetrievalIndex, config: RetrievalConfig
) -> tuple[str, list[str]]:
    """Retrieve, truncate each doc, then drop lowest-ranked docs over the total budget."""
    hits = query(index, question, config.top_k)
    entries = [(doc_id, truncate_words(registry.render_doc(doc_id), config.doc_word_limit)) for doc_id, _ in hits]
    if config.total_word_budget is not None:
        while entries and sum(word_count(t) for _, t in entries) > config.total_word_budget:
            entries.pop()
    return "\n\n".join(t for _, t in entries), [d for d, _ in entries]


def assemble_prompt(
    task,
    condition: PromptCondition,
    registry: Registry,
    index: RetrievalIndex | None = None,
    template: Template = DEFAULT,
    demo_pool: Sequence[DemoExample] | None = None,
) -> Prompt:
    """Build the prompt for one task under one condition.

    ``task`` needs ``task_id`` and ``question``. Demos come from
    ``demo_pool`` or, by default, the registry's task-level demos.
    """
    pool = registry.task_demos if demo_pool is None else demo_pool
    demo_ids = select_demos(pool, condition.shots, condition.demo_seed)
    warnings: list[str] = []
    sections: list[tuple[str, str]] = [("system", "")]
    retrieved: list[str] = []
    if condition.use_docs:
        if index is None:
            raise ValueError("use_docs requires a retrieval index")
        body, retrieved = documentation_body(task.question, registry, index, condition.retrieval)
        if not retrieved:
            warnings.append("retrieval returned no documents")
        sections.append(("documentation", body))
    if demo_ids:
        sections.append(("examples", "\n\n".join(render_demo(pool[i]) for i in demo_ids)))
    sections.append(("question", task.question))
    sections.append(("answer_format", ""))
    return Prompt(
        sections=tuple(sections),
        rendered=render_sections(sections, template),
        task_id=task.task_id,
        condition=condition,
        retrieved_doc_ids=tuple(retrieved),
        demo_ids=tuple(demo_ids),
        warnings=tuple(warnings),
    )
