import random

import pytest
from hypothesis import given, strategies as st

from oracles import f1_from_counts, max_matching_size, population_std
from tooldocs.errors import EmptyGold
from tooldocs.evaluator import TaskScore, aggregate, f1_score, summarize_trials
from tooldocs.plans import CommandPlan


def test_identity():
    gold = ["a x", "b y", "c z"]
    assert f1_score(gold, gold).f1 == 1.0


def test_empty_prediction():
    r = f1_score([], ["a"])
    assert (r.precision, r.recall, r.f1) == (0.0, 0.0, 0.0)


def test_two_of_three():
    r = f1_score(["a", "b", "x"], ["a", "b", "c"])
    assert r.precision == pytest.approx(2 / 3, abs=1e-12)
    assert r.recall == pytest.approx(2 / 3, abs=1e-12)
    assert r.f1 == pytest.approx(2 / 3, abs=1e-12)


def test_empty_gold():
    with pytest.raises(EmptyGold):
        f1_score(["a"], [])


def test_duplicates_use_multiset_semantics():
    r = f1_score(["a", "a"], ["a"])
    assert r.precision == 0.5 and r.recall == 1.0
    assert len(r.matched) == 1


def test_normalization_before_matching():
    assert f1_score(["a   b", "c \\\n d"], ["a b", "c d"]).f1 == 1.0


def test_wildcard_mode_recorded():
    gold = CommandPlan(("llmcloud sql users make USER --instance INSTANCE", "llmcloud sql users list"))
    pred = ["llmcloud sql users make alice --instance db1", "llmcloud sql users list"]
    assert f1_score(pred, gold, "exact").f1 == 0.5
    r = f1_score(pred, gold, "placeholder-wildcard")
    assert r.f1 == 1.0 and r.mode == "placeholder-wildcard"


def test_greedy_matches_maximum_matching_oracle():
    rng = random.Random(2024)
    alphabet = ["a", "b", "c", "d"]
    for _ in range(1500):
        pred = rng.choices(alphabet, k=rng.randint(0, 6))
        gold = rng.choices(alphabet, k=rng.randint(1, 6))
        want = f1_from_counts(max_matching_size(pred, gold), len(pred), len(gold))
        assert f1_score(pred, gold).f1 == pytest.approx(want, abs=1e-12)


@given(st.lists(st.sampled_from("abc"), max_size=6), st.lists(st.sampled_from("abc"), min_size=1, max_size=6),
       st.randoms())
def test_order_invariance(pred, gold, rnd):
    base = f1_score(pred, gold).f1
    p2, g2 = pred[:], gold[:]
    rnd.shuffle(p2)
    rnd.shuffle(g2)
    assert f1_score(p2, g2).f1 == base
    assert 0.0 <= base <= 1.0
    assert (base == 1.0) == (sorted(pred) == sorted(gold))


def test_three_trial_aggregate():
    agg = summarize_trials([0.12, 0.18, 0.24], n_tasks=50)
    assert agg.mean_f1 == pytest.approx(0.18, abs=1e-12)
    assert agg.max_f1 == pytest.approx(0.24, abs=1e-12)
    assert agg.std_f1 == pytest.approx(population_std([0.12, 0.18, 0.24]), abs=1e-12)
    assert agg.summary == "0.18 ± 0.05 (0.24)"


def test_single_trial_has_zero_std():
    agg = summarize_trials([0.37], n_tasks=5)
    assert agg.std_f1 == 0.0 and agg.max_f1 == agg.mean_f1
    assert agg.summary == "0.37"


def _scores(values, trial=0):
    return [TaskScore(f"t{i}", trial, f1_score(["a"], ["a"] if v else ["b"])) for i, v in enumerate(values)]


def test_oracle_like_report():
    report = aggregate(_scores([1] * 50))
    assert report.aggregate.mean_f1 == 1.0
    assert report.aggregate.std_f1 == 0.0
    assert report.aggregate.n_tasks == 50


def test_aggregate_invariant_to_task_order():
    scores = _scores([1, 0, 1, 1, 0, 0, 1]) + _scores([0, 0, 1, 1, 1, 0, 1], trial=1)
    a = aggregate(scores, {"x": 1})
    b = aggregate(list(reversed(scores)), {"x": 1})
    assert a.aggregate == b.aggregate


def test_report_json_and_csv_row():
    report = aggregate(_scores([1, 0]), {"match_mode": "exact"})
    d = report.to_dict()
    assert set(d) == {"per_task", "aggregate", "config", "config_digest", "metadata"}
    assert d["aggregate"]["mean_f1"] == 0.5
    row = report.csv_row(100)
    assert row[:6] == [100, 0.5, 0.0, 0.5, 2, 1]
    assert row[6] == report.digest
