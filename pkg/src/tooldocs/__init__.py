"""Benchmark tooling for planning with renamed command-line tools from their documentation."""

from .corpusforge import Benchmark, RenameMap, Task, apply_rename, check_leakage, forge, strip_markup
from .errors import ToolDocsError
from .evaluator import EvalReport, f1_score
from .plans import CommandPlan, extract_plan
from .progdsl import ProgramAST, execute, parse_program, render
from .registry import Registry, ToolSpec
from .retriever import RetrievalConfig, build_index, query

__version__ = "0.1.0"

__all__ = [
    "Benchmark", "CommandPlan", "EvalReport", "ProgramAST", "Registry", "RenameMap", "RetrievalConfig",
    "Task", "ToolDocsError", "ToolSpec", "apply_rename", "build_index", "check_leakage", "execute",
    "extract_plan", "f1_score", "forge", "parse_program", "query", "render", "strip_markup",
]
