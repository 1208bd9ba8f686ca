"""``tooldocs`` command line: forge, index, eval, sweep, replay and dsl.

Every subcommand exits 0 on success. Failures exit nonzero and print one
JSON object on stderr with the error class, originating module, message
and, where known, the task id.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .corpusforge import DEFAULT_FORBIDDEN, Benchmark, RenameMap, forge
from .errors import ConfigError, ToolDocsError
from .harness import EvalSetup, evaluate, index_registry, replay, sweep, sweep_csv
from .llmclient import BACKENDS, PlannerConfig, read_replay_log, write_replay_log
from .plans import MATCH_MODES
from .progdsl import execute, load_fixtures, parse_program
from .promptkit import DEFAULT, PromptCondition, Template
from .registry import Registry, dump_registry, load_registry
from .retriever import RetrievalConfig

EXIT_CONFIG = 2
EXIT_RUNTIME = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # route usage errors through the JSON error channel
        raise ConfigError(f"{self.prog}: {message}")


def _yes_no(text: str) -> bool:
    if text.lower() in ("yes", "y", "true", "1"):
        return True
    if text.lower() in ("no", "n", "false", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected yes or no, got {text!r}")


def parse_values(text: str) -> list[int]:
    """``100..800:100`` (inclusive range with step) or ``0,5,10``."""
    text = text.strip()
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (int(x) for x in span.split(".."))
            step_n = int(step) if step else 1
            if step_n <= 0:
                raise ConfigError("range step must be positive")
            return list(range(lo, hi + 1, step_n))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse axis values {text!r}") from None


def _tools_path(bench_path: str, tools: str | None) -> Path:
    if tools:
        return Path(tools)
    p = Path(bench_path)
    return p.with_name(p.stem + ".tools.jsonl")


def _add_eval_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--benchmark", required=True, help="benchmark JSON written by `forge`")
    p.add_argument("--tools", help="renamed tool registry (default: <benchmark>.tools.jsonl)")
    p.add_argument("--docs", type=_yes_no, default=True, help="include retrieved documentation (yes/no)")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="root seed for demo selection")
    p.add_argument("--backend", choices=BACKENDS, default="stub-oracle")
    p.add_argument("--model", default="")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--max-output-tokens", type=int, default=512)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--prompt-word-limit", type=int, help="reject prompts longer than this many words")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--doc-words", type=int, default=600)
    p.add_argument("--prompt-budget", type=int, help="total documentation word budget")
    p.add_argument("--match", choices=MATCH_MODES, default="exact")
    p.add_argument("--template", help="prompt template override file")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tooldocs", description="Documentation-driven tool-use benchmark runner.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("forge", help="build a renamed benchmark from a raw corpus")
    p.add_argument("--map", required=True, help="rename map JSON (array of [source, target])")
    p.add_argument("--corpus", required=True, help="directory of raw doc pages")
    p.add_argument("--tasks", help="source tasks JSON (default: <corpus>/tasks.json)")
    p.add_argument("--out", required=True, help="benchmark JSON path")
    p.add_argument("--tools-out", help="renamed registry path (default: <out>.tools.jsonl)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--forbid", action="append", help="forbidden source token (repeatable)")

    p = sub.add_parser("index", help="build and serialize the TF-IDF index")
    p.add_argument("--tools", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--doc-words", type=int, default=600)

    p = sub.add_parser("eval", help="evaluate one condition")
    _add_eval_args(p)
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--log", help="replay log path (default: <out>.replay.jsonl when --out is set)")

    p = sub.add_parser("sweep", help="evaluate along one axis")
    _add_eval_args(p)
    p.add_argument("--axis", required=True, choices=("doc_words", "shots"))
    p.add_argument("--values", required=True, help="e.g. 100..800:100 or 0,5,10")
    p.add_argument("--out-dir", help="directory for sweep.csv and per-point reports")

    p = sub.add_parser("replay", help="re-score a replay log without a backend")
    p.add_argument("--log", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--match", choices=MATCH_MODES, default="exact")
    p.add_argument("--out")

    p = sub.add_parser("dsl", help="parse and execute a program against fixtures")
    p.add_argument("--program", required=True)
    p.add_argument("--fixtures", required=True)
    p.add_argument("--input", action="append", default=[], metavar="NAME=VALUE")
    return ap


def _setup(args: argparse.Namespace) -> EvalSetup:
    bench = Benchmark.load(args.benchmark)
    registry = load_registry(_tools_path(args.benchmark, args.tools))
    retrieval = RetrievalConfig(top_k=args.top_k, doc_word_limit=args.doc_words,
                                total_word_budget=args.prompt_budget)
    planner = PlannerConfig(
        backend=args.backend, temperature=args.temperature, max_output_tokens=args.max_output_tokens,
        request_timeout=args.timeout, max_retries=args.max_retries,
        prompt_word_limit=args.prompt_word_limit, model=args.model,
    )
    template = Template.load(args.template) if args.template else DEFAULT
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    return EvalSetup(
        benchmark=bench, registry=registry,
        condition=PromptCondition(use_docs=args.docs, shots=args.shots, retrieval=retrieval),
        planner=planner, trials=args.trials, root_seed=args.seed, match_mode=args.match,
        template=template, workers=args.workers,
    )


def _with_paths(config: dict, args: argparse.Namespace, *names: str) -> dict:
    config = dict(config)
    config["paths"] = {n: getattr(args, n, None) for n in names}
    return config


def _stamp(report) -> None:
    report.metadata["created_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    report.metadata["tooldocs_version"] = __version__


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_forge(args: argparse.Namespace) -> int:
    tasks = args.tasks or str(Path(args.corpus) / "tasks.json")
    forbidden = frozenset(args.forbid) if args.forbid else DEFAULT_FORBIDDEN
    bench, registry = forge(args.corpus, tasks, RenameMap.load(args.map), forbidden=forbidden, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    bench.save(out)
    dump_registry(registry, _tools_path(args.out, args.tools_out))
    print(json.dumps({"tasks": len(bench.tasks), "tools": len(registry), "demos": len(bench.demo_pool),
                      "benchmark": str(out)}, sort_keys=True))
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    registry: Registry = load_registry(args.tools)
    cond = PromptCondition(retrieval=RetrievalConfig(top_k=args.top_k, doc_word_limit=args.doc_words))
    index = index_registry(registry, cond)
    index.save(args.out)
    print(json.dumps({"documents": len(index.doc_order), "terms": len(index.vocabulary), "index": args.out},
                     sort_keys=True))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    setup = _setup(args)
    report, records = evaluate(setup)
    report.config = _with_paths(report.config, args, "benchmark", "tools", "template")
    _stamp(report)
    _emit(report.to_json(), args.out)
    log_path = args.log or (str(Path(args.out).with_suffix(".replay.jsonl")) if args.out else None)
    if log_path:
        write_replay_log(log_path, records)
    print(f"mean F1 {report.aggregate.summary} over {report.aggregate.n_tasks} tasks", file=sys.stderr)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    setup = _setup(args)
    rows = sweep(setup, args.axis, parse_values(args.values))
    for value, report, _ in rows:
        report.config = _with_paths(report.config, args, "benchmark", "tools", "template")
        _stamp(report)
    table = sweep_csv(rows)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(table, encoding="utf-8")
        for value, report, records in rows:
            (out / f"report_{args.axis}_{value}.json").write_text(report.to_json(), encoding="utf-8")
            write_replay_log(out / f"report_{args.axis}_{value}.replay.jsonl", records)
    else:
        sys.stdout.write(table)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    bench = Benchmark.load(args.benchmark)
    report = replay(bench, read_replay_log(args.log), args.match,
                    {"match_mode": args.match, "replay": True, "paths": {"log": args.log, "benchmark": args.benchmark}})
    _stamp(report)
    _emit(report.to_json(), args.out)
    return 0


def _parse_inputs(pairs: Sequence[str]) -> dict[str, str]:
    inputs = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise ConfigError(f"--input expects NAME=VALUE, got {pair!r}")
        inputs[name] = value
    return inputs


def cmd_dsl(args: argparse.Namespace) -> int:
    inputs = _parse_inputs(args.input)
    names = tuple(dict.fromkeys(("IMAGE", "VIDEO", *inputs)))
    ast = parse_program(Path(args.program).read_text(encoding="utf-8"), inputs=names)
    run = execute(ast, inputs, load_fixtures(args.fixtures))
    payload = {
        "modules": run.module_sequence(),
        "trace": [vars(t) for t in run.trace],
        "result": run.result,
    }
    print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    return 0


COMMANDS = {
    "forge": cmd_forge,
    "index": cmd_index,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "replay": cmd_replay,
    "dsl": cmd_dsl,
}


def _fail(exc: ToolDocsError, code: int) -> int:
    print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    except ToolDocsError as exc:
        return _fail(exc, EXIT_RUNTIME)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(ConfigError(f"{type(exc).__name__}: {exc}"), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
