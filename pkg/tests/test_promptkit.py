import pytest

from tooldocs.corpusforge import Task
from tooldocs.errors import NotEnoughDemos, TemplateError
from tooldocs.plans import CommandPlan
from tooldocs.promptkit import (
    DEFAULT,
    SECTION_LABELS,
    TEMPLATE_VERSION,
    PromptCondition,
    Template,
    assemble_prompt,
    render_sections,
    select_demos,
)
from tooldocs.registry import DemoExample, Registry, ToolSpec
from tooldocs.retriever import RetrievalConfig, build_index, word_count

POOL = [DemoExample(f"question {i}", f"llmcloud cmd{i} a\nllmcloud cmd{i} b") for i in range(20)]
TASK = Task("t1", "How do I create a pubsub topic and publish?", CommandPlan(("x a", "y b")))


def _registry(n_words=50):
    specs = [
        ToolSpec(f"llmcloud pubsub topics {v}", v, f"llmcloud pubsub topics {v} TOPIC",
                 " ".join([f"{v} pubsub topic"] + ["filler"] * n_words))
        for v in ("make", "publish", "delete", "list")
    ] + [ToolSpec("llmcloud compute disks list", "list", "llmcloud compute disks list", "disk listing")]
    reg = Registry.from_specs(specs)
    reg.set_task_demos(POOL)
    return reg


def _index(reg, cfg=RetrievalConfig()):
    return build_index(((s.tool_id, reg.render_doc(s.tool_id)) for s in reg), cfg)


def test_select_demos_deterministic():
    assert select_demos(POOL, 5, 42) == select_demos(POOL, 5, 42)
    assert len(set(select_demos(POOL, 5, 42))) == 5


def test_select_zero():
    assert select_demos(POOL, 0, 1) == []


def test_select_too_many():
    with pytest.raises(NotEnoughDemos):
        select_demos(POOL, 21, 0)


def test_different_seeds_vary():
    picks = {tuple(select_demos(POOL, 3, s)) for s in range(10)}
    assert len(picks) > 1


def test_docs_only_condition():
    reg = _registry()
    p = assemble_prompt(TASK, PromptCondition(use_docs=True, shots=0), reg, _index(reg))
    labels = [label for label, _ in p.sections]
    assert labels == ["system", "documentation", "question", "answer_format"]
    assert p.retrieved_doc_ids and p.demo_ids == ()
    assert "llmcloud pubsub topics publish TOPIC" in p.section("documentation")
    assert TASK.question in p.rendered and "Commands:" in p.rendered


def test_demos_only_condition():
    reg = _registry()
    p = assemble_prompt(TASK, PromptCondition(use_docs=False, shots=5, demo_seed=1), reg)
    assert [label for label, _ in p.sections] == ["system", "examples", "question", "answer_format"]
    assert len(p.demo_ids) == 5
    assert p.section("examples").count("Question: ") == 5
    # sampled order, not sorted
    order = [POOL[i].instruction for i in p.demo_ids]
    body = p.section("examples")
    assert sorted(order, key=body.index) == order


def test_question_only_condition():
    reg = _registry()
    p = assemble_prompt(TASK, PromptCondition(use_docs=False, shots=0), reg)
    assert [label for label, _ in p.sections] == ["system", "question", "answer_format"]


def test_removing_docs_gives_no_docs_prompt():
    reg = _registry()
    with_docs = assemble_prompt(TASK, PromptCondition(True, 3, 7), reg, _index(reg))
    without = assemble_prompt(TASK, PromptCondition(False, 3, 7), reg)
    stripped = tuple(s for s in with_docs.sections if s[0] != "documentation")
    assert stripped == without.sections
    assert without.rendered == render_sections(stripped, DEFAULT)


def test_doc_word_budgets():
    reg = _registry(n_words=300)
    cfg = RetrievalConfig(top_k=3, doc_word_limit=100)
    p = assemble_prompt(TASK, PromptCondition(True, 0, retrieval=cfg), reg, _index(reg, cfg))
    assert word_count(p.section("documentation")) <= 3 * 100
    cfg = RetrievalConfig(top_k=3, doc_word_limit=100, total_word_budget=150)
    p = assemble_prompt(TASK, PromptCondition(True, 0, retrieval=cfg), reg, _index(reg, cfg))
    assert word_count(p.section("documentation")) <= 150
    assert len(p.retrieved_doc_ids) == 1


def test_empty_retrieval_warns():
    reg = _registry()
    task = Task("t2", "zzz qqq", TASK.gold_plan)
    p = assemble_prompt(task, PromptCondition(True, 0), reg, _index(reg))
    assert p.section("documentation") == "" and p.warnings


def test_prompt_is_reproducible():
    reg = _registry()
    a = assemble_prompt(TASK, PromptCondition(True, 4, 9), reg, _index(reg))
    b = assemble_prompt(TASK, PromptCondition(True, 4, 9), reg, _index(reg))
    assert a.rendered == b.rendered and a.digest() == b.digest()
    assert a.provenance["demo_ids"] == list(a.demo_ids)


def test_default_template_shape():
    assert DEFAULT.version == TEMPLATE_VERSION
    assert set(DEFAULT.sections) == set(SECTION_LABELS)


def test_template_override(tmp_path):
    text = "## system\nSYS\n## documentation\nDOCS:\n{documentation}\n## examples\n{examples}\n" \
           "## question\nQ: {question}\n## answer_format\nCommands:\n"
    path = tmp_path / "t.txt"
    path.write_text(text, encoding="utf-8")
    tmpl = Template.load(path)
    reg = _registry()
    p = assemble_prompt(TASK, PromptCondition(False, 0), reg, template=tmpl)
    assert p.rendered.startswith("SYS")
    assert f"Q: {TASK.question}" in p.rendered
    assert tmpl.digest() != DEFAULT.digest()


def test_template_missing_section():
    with pytest.raises(TemplateError):
        Template.parse("## system\nonly\n")
