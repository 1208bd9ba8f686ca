"""Evaluation runs, sweeps, and replay over a benchmark."""

from __future__ import annotations

import csv
import hashlib
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

from .corpusforge import Benchmark, Task
from .errors import ConfigError, ToolDocsError
from .evaluator import CSV_COLUMNS, EvalReport, TaskScore, aggregate, f1_score
from .llmclient import Planner, PlannerConfig, make_planner
from .plans import extract_plan
from .promptkit import DEFAULT, PromptCondition, Template, assemble_prompt
from .registry import Registry, render_spec
from .retriever import RetrievalIndex, build_index

SWEEP_AXES = ("doc_words", "shots")


def derive_seed(root_seed: int, trial: int, task_id: str) -> int:
    """Per-(task, trial) seed; independent of execution order."""
    h = hashlib.sha256(f"{root_seed}:{trial}:{task_id}".encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big")


def index_registry(registry: Registry, condition: PromptCondition) -> RetrievalIndex:
    return build_index(((s.tool_id, render_spec(s)) for s in registry), condition.retrieval)


@dataclass
class EvalSetup:
    benchmark: Benchmark
    registry: Registry
    condition: PromptCondition = field(default_factory=PromptCondition)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    trials: int = 1
    root_seed: int = 0
    match_mode: str = "exact"
    template: Template = DEFAULT
    workers: int = 1

    def run_config(self) -> dict:
        c = self.condition
        return {
            "condition": {"use_docs": c.use_docs, "shots": c.shots},
            "retrieval": {
                "top_k": c.retrieval.top_k,
                "doc_words": c.retrieval.doc_word_limit,
                "prompt_budget": c.retrieval.total_word_budget,
            },
            "seeds": {"root_seed": self.root_seed, "trials": self.trials,
                      "derivation": "sha256(root:trial:task_id)[:8]"},
            "planner": self.planner.to_dict(),
            "match_mode": self.match_mode,
            "template": {"version": self.template.version, "digest": self.template.digest()},
            "benchmark": {
                "n_tasks": len(self.benchmark.tasks),
                "n_demos": len(self.benchmark.demo_pool),
                "rename_map_digest": self.benchmark.metadata.get("rename_map_digest"),
            },
            "n_tools": len(self.registry),
        }


def _task_error(exc: ToolDocsError, task_id: str) -> ToolDocsError:
    if getattr(exc, "task_id", None) is None:
        exc.task_id = task_id
    return exc


def evaluate(setup: EvalSetup, planner: Planner | None = None) -> tuple[EvalReport, list[dict]]:
    """One condition over every (trial, task). Returns the report and replay records."""
    if setup.trials < 1:
        raise ConfigError("trials must be >= 1")
    bench, registry = setup.benchmark, setup.registry
    if not bench.tasks:
        raise ConfigError("benchmark has no tasks")
    if not registry.task_demos and bench.demo_pool:
        registry.set_task_demos(bench.demo_pool)
    registry.freeze()
    index = index_registry(registry, setup.condition) if setup.condition.use_docs else None
    planner = planner or make_planner(setup.planner, gold=bench.gold_by_id(), registry=registry,
                                      demo_pool=bench.demo_pool)
    cond_record = {"use_docs": setup.condition.use_docs, "shots": setup.condition.shots}

    def one(job: tuple[int, Task]) -> tuple[TaskScore, dict]:
        trial, task = job
        try:
            cond = replace(setup.condition, demo_seed=derive_seed(setup.root_seed, trial, task.task_id))
            prompt = assemble_prompt(task, cond, registry, index, setup.template, bench.demo_pool)
            completion = planner.complete(prompt)
            plan = extract_plan(completion)
            score = f1_score(plan, task.gold_plan, setup.match_mode)
        except ToolDocsError as exc:
            raise _task_error(exc, task.task_id)
        record = {
            "task_id": task.task_id,
            "trial": trial,
            "condition": cond_record,
            "prompt_digest": prompt.digest(),
            "completion": completion,
        }
        return TaskScore(task.task_id, trial, score, plan.warnings, prompt.warnings), record

    jobs = [(trial, task) for trial in range(setup.trials) for task in bench.tasks]
    if setup.workers > 1:
        with ThreadPoolExecutor(max_workers=setup.workers) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    scores = [s for s, _ in results]
    records = [r for _, r in results]
    return aggregate(scores, setup.run_config()), records


def replay(benchmark: Benchmark, records: Sequence[dict], match_mode: str = "exact",
           config: dict | None = None) -> EvalReport:
    """Re-score logged completions without a backend."""
    gold = benchmark.gold_by_id()
    scores = []
    for rec in records:
        task_id = rec["task_id"]
        if task_id not in gold:
            raise ConfigError(f"replay log names unknown task {task_id!r}")
        plan = extract_plan(rec["completion"])
        scores.append(TaskScore(task_id, int(rec.get("trial", 0)), f1_score(plan, gold[task_id], match_mode),
                                plan.warnings))
    cfg = dict(config or {})
    cfg.setdefault("match_mode", match_mode)
    cfg.setdefault("replay", True)
    return aggregate(scores, cfg)


def _check_axis(axis: str, values: Sequence[int]) -> None:
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    floor = 1 if axis == "doc_words" else 0
    if any(v < floor for v in values):
        raise ConfigError(f"{axis} values must be >= {floor}")
    if list(values) != sorted(set(values)):
        raise ConfigError("sweep values must be strictly increasing")


def sweep(setup: EvalSetup, axis: str, values: Sequence[int]) -> list[tuple[int, EvalReport, list[dict]]]:
    """One full evaluation per axis value; everything else held fixed."""
    _check_axis(axis, values)
    out = []
    for v in values:
        cond = setup.condition
        if axis == "doc_words":
            cond = replace(cond, retrieval=replace(cond.retrieval, doc_word_limit=v))
        else:
            cond = replace(cond, shots=v)
        point = replace(setup, condition=cond, registry=_fresh(setup.registry))
        report, records = evaluate(point)
        out.append((v, report, records))
    return out


def _fresh(registry: Registry) -> Registry:
    reg = Registry.from_specs(registry)
    reg.set_task_demos(registry.task_demos)
    return reg


def sweep_csv(rows: Sequence[tuple[int, EvalReport, list[dict]]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for value, report, _ in rows:
        w.writerow(report.csv_row(value))
    return buf.getvalue()
