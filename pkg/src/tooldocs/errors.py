"""Exception hierarchy shared by every tooldocs module."""

from __future__ import annotations


class ToolDocsError(Exception):
    """Base class. ``module`` names the subsystem that raised."""

    module = "tooldocs"

    def to_dict(self) -> dict:
        payload = {"error": type(self).__name__, "module": self.module, "message": str(self)}
        task_id = getattr(self, "task_id", None)
        if task_id is not None:
            payload["task_id"] = task_id
        return payload


# registry
class RegistryError(ToolDocsError):
    module = "registry"


class DuplicateToolId(RegistryError):
    pass


class UnknownToolId(RegistryError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return Exception.__str__(self)


class RegistryFrozen(RegistryError):
    pass


# corpusforge
class ForgeError(ToolDocsError):
    module = "corpusforge"


class InvalidEncoding(ForgeError):
    pass


class InvalidRenameMap(ForgeError):
    pass


class LeakageDetected(ForgeError):
    def __init__(self, violations: list, where: str = ""):
        self.violations = violations
        self.where = where
        shown = ", ".join(f"{v.token!r}@{v.offset}" for v in violations[:5])
        super().__init__(f"source vocabulary leaked in {where or 'output'}: {shown}")


class InvalidGoldPlan(ForgeError):
    def __init__(self, message: str, task_id: str | None = None):
        self.task_id = task_id
        super().__init__(message)


# retriever
class RetrievalError(ToolDocsError):
    module = "retriever"


class DuplicateDocId(RetrievalError):
    pass


class EmptyCorpus(RetrievalError):
    pass


# promptkit
class PromptError(ToolDocsError):
    module = "promptkit"


class NotEnoughDemos(PromptError):
    pass


class TemplateError(PromptError):
    pass


# llmclient
class PlannerError(ToolDocsError):
    module = "llmclient"


class BackendUnavailable(PlannerError):
    pass


class Timeout(PlannerError):
    pass


class BudgetExceeded(PlannerError):
    pass


# progdsl
class DSLError(ToolDocsError):
    module = "progdsl"


class ProgramSyntaxError(DSLError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line, self.col, self.expected = line, col, expected
        msg = f"line {line}, col {col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class UndefinedVariable(DSLError):
    def __init__(self, step: int, name: str):
        self.step, self.name = step, name
        super().__init__(f"step {step}: variable {name} is not defined")


class DuplicateTarget(DSLError):
    def __init__(self, step: int, name: str):
        self.step, self.name = step, name
        super().__init__(f"step {step}: variable {name} is already bound")


class UnknownModule(DSLError):
    pass


class MissingArgKey(DSLError):
    pass


class FixtureMiss(DSLError):
    pass


# evaluator
class EvalError(ToolDocsError):
    module = "evaluator"


class EmptyLine(EvalError):
    pass


class EmptyGold(EvalError):
    pass


class ConfigError(ToolDocsError, ValueError):
    module = "cli"
