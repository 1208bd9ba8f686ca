import csv
import json
from importlib.resources import files

import pytest

from tooldocs.cli import main, parse_values
from tooldocs.fixtures import fixture_paths

DATA = files("tooldocs") / "data"
BENCH = str(fixture_paths()[0])


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_values():
    assert parse_values("100..800:100") == [100, 200, 300, 400, 500, 600, 700, 800]
    assert parse_values("0,5,10,15") == [0, 5, 10, 15]
    assert parse_values("3..5") == [3, 4, 5]


def test_eval_oracle(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = _run(capsys, "eval", "--benchmark", BENCH, "--docs", "yes", "--shots", "0",
                      "--backend", "stub-oracle", "--out", str(out))
    assert code == 0
    report = json.loads(out.read_text())
    assert report["aggregate"]["mean_f1"] == 1.0
    assert (tmp_path / "r.replay.jsonl").exists()
    assert report["config"]["paths"]["benchmark"] == BENCH
    assert "created_at" in report["metadata"]


def test_eval_to_stdout(capsys):
    code, out, _ = _run(capsys, "eval", "--benchmark", BENCH, "--docs", "no", "--backend", "stub-docgrep")
    assert code == 0
    assert json.loads(out)["aggregate"]["mean_f1"] == 0.0


def test_forge_golden_tasks(capsys, tmp_path):
    golden = DATA / "golden_tasks"
    out = tmp_path / "bench.json"
    code, stdout, _ = _run(capsys, "forge", "--map", str(DATA / "gcp_rename_map.json"), "--corpus", str(golden / "raw"),
                           "--tasks", str(golden / "tasks.json"), "--out", str(out))
    assert code == 0
    assert json.loads(stdout)["tasks"] == 5
    assert (tmp_path / "bench.tools.jsonl").exists()


def test_forge_leak_is_machine_readable(capsys, tmp_path):
    golden = DATA / "golden_tasks"
    m = tmp_path / "m.json"
    m.write_text(json.dumps([["gsutil", "llmutil"]]))
    code, _, err = _run(capsys, "forge", "--map", str(m), "--corpus", str(golden / "raw"), "--tasks", str(golden / "tasks.json"),
                        "--out", str(tmp_path / "b.json"))
    assert code == 1
    payload = json.loads(err)
    assert payload["error"] == "LeakageDetected" and payload["module"] == "corpusforge"


def test_index(capsys, tmp_path):
    code, out, _ = _run(capsys, "index", "--tools", str(fixture_paths()[1]), "--out", str(tmp_path / "i.json"))
    assert code == 0 and json.loads(out)["documents"] == 200


def test_sweep_writes_csv_and_reports(capsys, tmp_path):
    code, _, _ = _run(capsys, "sweep", "--benchmark", BENCH, "--backend", "stub-docgrep", "--axis", "doc_words",
                      "--values", "100..800:100", "--out-dir", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert [r["axis_value"] for r in rows] == [str(v) for v in range(100, 900, 100)]
    assert len(list(tmp_path.glob("report_doc_words_*.json"))) == 8


def test_replay_matches_eval(capsys, tmp_path):
    out = tmp_path / "r.json"
    _run(capsys, "eval", "--benchmark", BENCH, "--backend", "stub-demoecho", "--docs", "no", "--shots", "2",
         "--trials", "2", "--out", str(out))
    code, stdout, _ = _run(capsys, "replay", "--log", str(tmp_path / "r.replay.jsonl"), "--benchmark", BENCH)
    assert code == 0
    original = json.loads(out.read_text())
    replayed = json.loads(stdout)
    assert [t["f1"] for t in replayed["per_task"]] == [t["f1"] for t in original["per_task"]]


def test_dsl(capsys):
    v = DATA / "visprog"
    code, out, _ = _run(capsys, "dsl", "--program", str(v / "track_cat.prog"), "--fixtures", str(v / "fixtures.json"),
                        "--input", "IMAGE=frames/cat_frame0.png", "--input", "VIDEO=clips/cat.mp4")
    assert code == 0
    assert json.loads(out)["modules"] == ["BETTERLOC", "BETTERSEG", "TRACK"]


def test_dsl_fixture_miss(capsys):
    v = DATA / "visprog"
    code, _, err = _run(capsys, "dsl", "--program", str(v / "track_cat.prog"), "--fixtures", str(v / "fixtures.json"),
                        "--input", "IMAGE=other.png", "--input", "VIDEO=clips/cat.mp4")
    assert code == 1 and json.loads(err)["error"] == "FixtureMiss"


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["eval"],
    ["eval", "--benchmark", BENCH, "--shots", "-1"],
    ["eval", "--benchmark", BENCH, "--docs", "maybe"],
    ["eval", "--benchmark", "/nonexistent/b.json"],
    ["sweep", "--benchmark", BENCH, "--axis", "doc_words", "--values", "x..y"],
])
def test_config_errors(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert json.loads(err)["error"] == "ConfigError"
