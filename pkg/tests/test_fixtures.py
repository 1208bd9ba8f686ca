from tooldocs.corpusforge import check_leakage
from tooldocs.fixtures import build_fixture, catalog, fixture_paths, load_fixture, synthetic_source
from tooldocs.registry import dump_registry


def test_catalog_has_200_tools():
    tools = catalog()
    assert len(tools) == 200
    assert len({t.tool_id for t in tools}) == 200


def test_shipped_fixture_matches_generator(tmp_path):
    bench, reg = build_fixture(0)
    bench_path, tools_path = fixture_paths()
    bench.save(tmp_path / "b.json")
    dump_registry(reg, tmp_path / "b.tools.jsonl")
    assert (tmp_path / "b.json").read_bytes() == bench_path.read_bytes()
    assert (tmp_path / "b.tools.jsonl").read_bytes() == tools_path.read_bytes()


def test_shipped_fixture_shape():
    bench, reg = load_fixture()
    assert len(bench.tasks) == 50 and len(reg) == 200
    assert all(len(t.gold_plan) >= 2 for t in bench.tasks)
    assert len(bench.demo_pool) >= 15


def test_shipped_fixture_is_leak_free():
    bench, reg = load_fixture()
    texts = [t.question for t in bench.tasks] + [l for t in bench.tasks for l in t.gold_plan.lines]
    texts += [d.instruction + "\n" + d.plan for d in bench.demo_pool]
    texts += [s.tool_id + "\n" + s.signature + "\n" + s.doc_text for s in reg]
    assert all(check_leakage(t) == [] for t in texts)


def test_pages_contain_unrelated_boilerplate():
    pages, _, _ = synthetic_source(0)
    page = next(iter(pages.values()))
    assert "<nav" in page and "GLOBAL FLAGS" in page


def test_generator_is_seeded():
    a, b = synthetic_source(5)[1], synthetic_source(5)[1]
    assert a == b
    assert synthetic_source(6)[1] != a
