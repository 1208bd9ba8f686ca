from dataclasses import replace

import pytest

from tooldocs.corpusforge import Benchmark, Task
from tooldocs.errors import ConfigError, NotEnoughDemos
from tooldocs.fixtures import load_fixture
from tooldocs.harness import EvalSetup, derive_seed, evaluate, replay, sweep, sweep_csv
from tooldocs.llmclient import PlannerConfig
from tooldocs.plans import CommandPlan
from tooldocs.promptkit import PromptCondition
from tooldocs.registry import Registry
from tooldocs.retriever import RetrievalConfig


@pytest.fixture(scope="module")
def fixture():
    return load_fixture()


def _setup(fixture, **kw):
    bench, reg = fixture
    fresh = type(reg).from_specs(reg)
    fresh.set_task_demos(bench.demo_pool)
    return EvalSetup(benchmark=bench, registry=fresh, **kw)


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(0, 1, "t1") == derive_seed(0, 1, "t1")
    assert len({derive_seed(0, t, k) for t in range(3) for k in ("a", "b")}) == 6


def test_oracle_scores_one(fixture):
    report, records = evaluate(_setup(fixture, planner=PlannerConfig(backend="stub-oracle")))
    assert report.aggregate.mean_f1 == 1.0
    assert report.aggregate.n_tasks == 50
    assert len(records) == 50
    assert set(records[0]) == {"task_id", "trial", "condition", "prompt_digest", "completion"}


def test_parallel_matches_serial(fixture):
    cond = PromptCondition(use_docs=True, shots=2)
    planner = PlannerConfig(backend="stub-demoecho")
    serial, rs = evaluate(_setup(fixture, condition=cond, planner=planner, trials=2))
    parallel, rp = evaluate(_setup(fixture, condition=cond, planner=planner, trials=2, workers=4))
    assert serial.to_json() == parallel.to_json()
    assert rs == rp


def test_trials_vary_demo_selection(fixture):
    cond = PromptCondition(use_docs=False, shots=1)
    _, records = evaluate(_setup(fixture, condition=cond, planner=PlannerConfig(backend="stub-demoecho"), trials=3))
    by_task = {}
    for r in records:
        by_task.setdefault(r["task_id"], set()).add(r["prompt_digest"])
    assert any(len(v) > 1 for v in by_task.values())


def test_config_records_everything(fixture):
    report, _ = evaluate(_setup(fixture, planner=PlannerConfig(backend="stub-docgrep"), match_mode="exact"))
    cfg = report.config
    assert cfg["retrieval"] == {"top_k": 10, "doc_words": 600, "prompt_budget": None}
    assert cfg["planner"]["backend"] == "stub-docgrep" and cfg["planner"]["temperature"] == 0.0
    assert cfg["template"]["version"] == "cli-plan-v1"
    assert cfg["match_mode"] == "exact"
    assert cfg["seeds"]["root_seed"] == 0


def test_replay_reproduces_scores(fixture):
    setup = _setup(fixture, condition=PromptCondition(True, 2), planner=PlannerConfig(backend="stub-demoecho"),
                   trials=2)
    report, records = evaluate(setup)
    again = replay(fixture[0], records, "exact")
    assert [s.f1 for s in again.per_task] == [s.f1 for s in report.per_task]
    assert again.aggregate == report.aggregate


def test_replay_unknown_task(fixture):
    with pytest.raises(ConfigError):
        replay(fixture[0], [{"task_id": "nope", "trial": 0, "completion": ""}])


def test_errors_carry_task_id(fixture):
    bench, _ = fixture
    small = Benchmark(bench.tasks[:2], bench.demo_pool[:1], bench.metadata)
    setup = replace(_setup(fixture, condition=PromptCondition(False, 3)), benchmark=small)
    setup.registry.set_task_demos(small.demo_pool)
    with pytest.raises(NotEnoughDemos) as exc:
        evaluate(setup)
    assert exc.value.task_id == small.tasks[0].task_id
    assert exc.value.to_dict()["module"] == "promptkit"


def test_sweep_doc_words_shape(fixture):
    rows = sweep(_setup(fixture, planner=PlannerConfig(backend="stub-docgrep")), "doc_words",
                 list(range(100, 900, 100)))
    lines = sweep_csv(rows).splitlines()
    assert lines[0] == "axis_value,mean_f1,std_f1,max_f1,n_tasks,n_trials,config_digest"
    assert [int(x.split(",")[0]) for x in lines[1:]] == list(range(100, 900, 100))
    assert len({r[1].digest for r in rows}) == 8


def test_shots_sweep(fixture):
    rows = sweep(_setup(fixture, condition=PromptCondition(False, 0), planner=PlannerConfig(backend="stub-demoecho")),
                 "shots", [0, 5, 10, 15])
    assert [r[1].config["condition"]["shots"] for r in rows] == [0, 5, 10, 15]


def test_single_value_sweep_equals_plain_run(fixture):
    cond = PromptCondition(True, 0, retrieval=RetrievalConfig(doc_word_limit=200))
    plain, _ = evaluate(_setup(fixture, condition=cond, planner=PlannerConfig(backend="stub-docgrep")))
    [(_, swept, _)] = sweep(_setup(fixture, planner=PlannerConfig(backend="stub-docgrep")), "doc_words", [200])
    assert swept.to_json() == plain.to_json()


@pytest.mark.parametrize("axis,values", [("temperature", [1]), ("doc_words", []), ("doc_words", [0, 100]),
                                         ("shots", [5, 0]), ("shots", [1, 1])])
def test_bad_sweeps(fixture, axis, values):
    with pytest.raises(ConfigError):
        sweep(_setup(fixture), axis, values)


def test_trials_must_be_positive(fixture):
    with pytest.raises(ConfigError):
        evaluate(_setup(fixture, trials=0))


def test_no_docs_condition_skips_index():
    bench = Benchmark((Task("a", "q", CommandPlan(("x 1", "y 2"))),))
    report, _ = evaluate(EvalSetup(bench, Registry(), PromptCondition(False, 0)))
    assert report.aggregate.mean_f1 == 1.0
