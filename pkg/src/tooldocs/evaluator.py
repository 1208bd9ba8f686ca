"""Command-line-level F1 and aggregation into mean ± std (max) reports."""

from __future__ import annotations

import hashlib
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConfigError, EmptyGold
from .plans import MATCH_MODES, CommandPlan, lines_match, normalize_command

CSV_COLUMNS = ("axis_value", "mean_f1", "std_f1", "max_f1", "n_tasks", "n_trials", "config_digest")


@dataclass(frozen=True)
class F1Result:
    precision: float
    recall: float
    f1: float
    matched: tuple[tuple[str, str], ...] = ()
    mode: str = "exact"

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "matched": [list(p) for p in self.matched],
            "mode": self.mode,
        }


def harmonic(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def f1_score(pred: CommandPlan | Sequence[str], gold: CommandPlan | Sequence[str], mode: str = "exact") -> F1Result:
    """Greedy one-to-one matching in prediction order; each gold line is used once."""
    if mode not in MATCH_MODES:
        raise ConfigError(f"unknown match mode {mode!r}")
    pred_lines = [normalize_command(x) for x in (pred.lines if isinstance(pred, CommandPlan) else pred)]
    gold_lines = [normalize_command(x) for x in (gold.lines if isinstance(gold, CommandPlan) else gold)]
    if not gold_lines:
        raise EmptyGold("gold plan is empty")
    if not pred_lines:
        return F1Result(0.0, 0.0, 0.0, (), mode)
    used = [False] * len(gold_lines)
    matched = []
    for p in pred_lines:
        for j, g in enumerate(gold_lines):
            if not used[j] and lines_match(p, g, mode):
                used[j] = True
                matched.append((p, g))
                break
    precision = len(matched) / len(pred_lines)
    recall = len(matched) / len(gold_lines)
    return F1Result(precision, recall, harmonic(precision, recall), tuple(matched), mode)


@dataclass(frozen=True)
class TaskScore:
    task_id: str
    trial: int
    f1: F1Result
    extraction_warnings: tuple[str, ...] = ()
    prompt_warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "trial": self.trial,
            "f1": self.f1.to_dict(),
            "extraction_warnings": list(self.extraction_warnings),
            "prompt_warnings": list(self.prompt_warnings),
        }


@dataclass(frozen=True)
class Aggregate:
    mean_f1: float
    std_f1: float
    max_f1: float
    n_tasks: int
    n_trials: int
    trial_means: tuple[float, ...] = ()

    @property
    def summary(self) -> str:
        """Report cell such as ``0.18 ± 0.05 (0.24)``, or just the mean for one trial."""
        if self.n_trials <= 1:
            return f"{self.mean_f1:.2f}"
        return f"{self.mean_f1:.2f} ± {self.std_f1:.2f} ({self.max_f1:.2f})"

    def to_dict(self) -> dict:
        return {
            "mean_f1": self.mean_f1,
            "std_f1": self.std_f1,
            "max_f1": self.max_f1,
            "n_tasks": self.n_tasks,
            "n_trials": self.n_trials,
            "trial_means": list(self.trial_means),
            "summary": self.summary,
        }


def summarize_trials(trial_means: Sequence[float], n_tasks: int) -> Aggregate:
    """Mean, population std and max over per-trial mean F1."""
    means = [float(m) for m in trial_means]
    if not means:
        raise ValueError("need at least one trial")
    mu = math.fsum(means) / len(means)
    if len(means) == 1:
        return Aggregate(mu, 0.0, mu, n_tasks, 1, tuple(means))
    std = math.sqrt(math.fsum((m - mu) ** 2 for m in means) / len(means))
    return Aggregate(mu, std, max(means), n_tasks, len(means), tuple(means))


def aggregate_scores(scores: Sequence[TaskScore]) -> Aggregate:
    if not scores:
        raise ValueError("need at least one task score")
    by_trial: dict[int, list[float]] = defaultdict(list)
    for s in scores:
        by_trial[s.trial].append(s.f1.f1)
    tasks = {s.task_id for s in scores}
    # fsum over sorted values keeps the mean independent of task order
    trial_means = [math.fsum(sorted(v)) / len(v) for _, v in sorted(by_trial.items())]
    return summarize_trials(trial_means, len(tasks))


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class EvalReport:
    per_task: list[TaskScore]
    aggregate: Aggregate
    config: dict
    metadata: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return config_digest(self.config)

    def to_dict(self) -> dict:
        return {
            "per_task": [s.to_dict() for s in self.per_task],
            "aggregate": self.aggregate.to_dict(),
            "config": self.config,
            "config_digest": self.digest,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def csv_row(self, axis_value) -> list:
        a = self.aggregate
        return [axis_value, a.mean_f1, a.std_f1, a.max_f1, a.n_tasks, a.n_trials, self.digest]


def aggregate(per_task: Sequence[TaskScore], config: dict | None = None) -> EvalReport:
    ordered = sorted(per_task, key=lambda s: s.trial)
    return EvalReport(list(ordered), aggregate_scores(ordered), dict(config or {}))
