"""Planner backends: a retrying HTTP client and deterministic offline stubs."""

from __future__ import annotations

import json
import logging
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import httpx

from .errors import BackendUnavailable, BudgetExceeded, ConfigError, Timeout
from .plans import ANSWER_MARKER, CommandPlan, extract_plan
from .promptkit import Prompt
from .registry import DemoExample, Registry
from .retriever import word_count

log = logging.getLogger(__name__)

BACKENDS = ("http", "stub-oracle", "stub-docgrep", "stub-demoecho")
ENDPOINT_ENV = "TOOLDOCS_ENDPOINT"
API_KEY_ENV = "TOOLDOCS_API_KEY"

__all__ = [
    "BACKENDS", "PlannerConfig", "Planner", "OraclePlanner", "DocGrepPlanner", "DemoEchoPlanner",
    "HttpPlanner", "make_planner", "complete", "extract_plan", "CommandPlan",
]


@dataclass(frozen=True)
class PlannerConfig:
    backend: str = "stub-oracle"
    temperature: float = 0.0
    max_output_tokens: int = 512
    request_timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 1.0
    prompt_word_limit: int | None = None
    model: str = ""

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")

    def to_dict(self) -> dict:
        # credentials never enter the recorded config
        return {
            "backend": self.backend,
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "max_retries": self.max_retries,
            "prompt_word_limit": self.prompt_word_limit,
            "model": self.model,
        }


def _render_answer(lines: Sequence[str]) -> str:
    return f"{ANSWER_MARKER}\n" + "\n".join(lines)


_OPTIONAL = re.compile(r"\s*\[[^\[\]]*\]")


def required_form(signature: str) -> str:
    """Drop bracketed optional parts of a usage line, innermost first."""
    prev = None
    while prev != signature:
        prev, signature = signature, _OPTIONAL.sub("", signature)
    return " ".join(signature.split())


class Planner:
    def __init__(self, config: PlannerConfig):
        self.config = config

    def check_budget(self, prompt: Prompt) -> None:
        limit = self.config.prompt_word_limit
        if limit is not None and word_count(prompt.rendered) > limit:
            raise BudgetExceeded(f"prompt has {word_count(prompt.rendered)} words, limit is {limit}")

    def complete(self, prompt: Prompt) -> str:
        self.check_budget(prompt)
        return self._complete(prompt)

    def _complete(self, prompt: Prompt) -> str:
        raise NotImplementedError


class OraclePlanner(Planner):
    """Answers with the gold plan of the task named in the prompt's provenance."""

    def __init__(self, config: PlannerConfig, gold: Mapping[str, CommandPlan]):
        super().__init__(config)
        self.gold = gold

    def _complete(self, prompt: Prompt) -> str:
        return _render_answer(self.gold[prompt.task_id].lines)


class DocGrepPlanner(Planner):
    """Emits each retrieved tool's signature if its id survives in the documentation section."""

    def __init__(self, config: PlannerConfig, registry: Registry):
        super().__init__(config)
        self.registry = registry

    def _complete(self, prompt: Prompt) -> str:
        docs = prompt.section("documentation") or ""
        lines = []
        for tool_id in prompt.retrieved_doc_ids:
            if tool_id in docs and tool_id in self.registry:
                spec = self.registry.lookup(tool_id)
                lines.append(required_form(spec.signature or tool_id))
        return _render_answer(lines)


class DemoEchoPlanner(Planner):
    """Copies the plan of the first demo in the prompt."""

    def __init__(self, config: PlannerConfig, demo_pool: Sequence[DemoExample]):
        super().__init__(config)
        self.demo_pool = demo_pool

    def _complete(self, prompt: Prompt) -> str:
        if not prompt.demo_ids:
            return _render_answer([])
        return _render_answer(self.demo_pool[prompt.demo_ids[0]].plan.splitlines())


_TRANSIENT_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


def _completion_text(payload: dict) -> str:
    for key in ("completion", "text", "output"):
        if isinstance(payload.get(key), str):
            return payload[key]
    choices = payload.get("choices")
    if choices:
        first = choices[0]
        if isinstance(first.get("text"), str):
            return first["text"]
        msg = first.get("message") or {}
        if isinstance(msg.get("content"), str):
            return msg["content"]
    raise BackendUnavailable(f"response carries no completion text: keys {sorted(payload)}")


class HttpPlanner(Planner):
    """POSTs ``{prompt, temperature, max_tokens}`` to an endpoint with retry/backoff."""

    def __init__(
        self,
        config: PlannerConfig,
        endpoint: str | None = None,
        api_key: str | None = None,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        super().__init__(config)
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        if not self.endpoint:
            raise BackendUnavailable(f"http backend needs an endpoint; set {ENDPOINT_ENV}")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.client = client or httpx.Client(timeout=config.request_timeout)
        self.sleep = sleep

    def _complete(self, prompt: Prompt) -> str:
        body = {
            "prompt": prompt.rendered,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        if self.config.model:
            body["model"] = self.config.model
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        last: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self.sleep(self.config.backoff_base * 2 ** (attempt - 1))
            try:
                resp = self.client.post(self.endpoint, json=body, headers=headers,
                                        timeout=self.config.request_timeout)
            except httpx.TimeoutException:
                last = Timeout(f"request timed out after {self.config.request_timeout}s")
                log.warning("attempt %d for %s timed out", attempt + 1, prompt.task_id)
                continue
            except httpx.TransportError as exc:
                last = BackendUnavailable(f"transport error: {exc}")
                log.warning("attempt %d for %s failed: %s", attempt + 1, prompt.task_id, exc)
                continue
            if resp.status_code in _TRANSIENT_STATUS:
                last = BackendUnavailable(f"HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise BackendUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}")
            return _completion_text(resp.json())
        assert last is not None
        raise last


def make_planner(
    config: PlannerConfig,
    *,
    gold: Mapping[str, CommandPlan] | None = None,
    registry: Registry | None = None,
    demo_pool: Sequence[DemoExample] | None = None,
    **http_kwargs,
) -> Planner:
    if config.backend == "stub-oracle":
        if gold is None:
            raise ConfigError("stub-oracle needs gold plans")
        return OraclePlanner(config, gold)
    if config.backend == "stub-docgrep":
        if registry is None:
            raise ConfigError("stub-docgrep needs the tool registry")
        return DocGrepPlanner(config, registry)
    if config.backend == "stub-demoecho":
        return DemoEchoPlanner(config, demo_pool if demo_pool is not None else
                               (registry.task_demos if registry is not None else ()))
    return HttpPlanner(config, **http_kwargs)


def complete(prompt: Prompt, config: PlannerConfig, **fixtures) -> str:
    return make_planner(config, **fixtures).complete(prompt)


def write_replay_log(path: str | Path, records: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_replay_log(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
