"""Exception hierarchy for the amr2asp pipeline.

Every stage raises subclasses of :class:`Amr2AspError`, so callers (CLI,
service) can map any pipeline failure to a stage error without catching
bare exceptions.
"""

from __future__ import annotations


class Amr2AspError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------- PENMAN


class PenmanError(Amr2AspError):
    """Malformed PENMAN input."""


class EmptyInput(PenmanError):
    pass


class UnbalancedParens(PenmanError):
    pass


class DuplicateVariable(PenmanError):
    pass


class DanglingReference(PenmanError):
    pass


# ----------------------------------------------------------- knowledge


class KnowledgeError(Amr2AspError):
    pass


class UnknownReference(KnowledgeError):
    pass


class DuplicateCategory(KnowledgeError):
    pass


class EmptyCategory(KnowledgeError):
    pass


class AmbiguousMatch(KnowledgeError):
    """Two categories claim the same concept and no precedence rule applies."""

    def __init__(self, concept: str, candidates: list[str]):
        super().__init__(f"concept {concept!r} matches {sorted(candidates)}")
        self.concept = concept
        self.candidates = candidates


# ------------------------------------------------------------- prompts


class PromptError(Amr2AspError):
    pass


class MissingBinding(PromptError):
    pass


class MalformedList(PromptError):
    pass


class FactSyntaxError(PromptError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyResponse(PromptError):
    pass


class ReplayMiss(PromptError):
    """Replay-mode transcript has no entry for the rendered prompt."""

    def __init__(self, stage: str, prompt: str):
        super().__init__(f"no transcript entry for stage {stage!r}")
        self.stage = stage
        self.prompt = prompt


class PipelineStageError(PromptError):
    """Wraps any error raised while executing one pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


# ------------------------------------------------------------ asp_core


class AspError(Amr2AspError):
    pass


class AspSyntaxError(AspError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnsafeVariable(AspError):
    pass


class MissingShow(AspError):
    pass


class ArityMismatch(AspError):
    pass


# -------------------------------------------------------------- rulegen


class NoPairings(Amr2AspError):
    pass


# -------------------------------------------------------- constraintgen


class CompileError(Amr2AspError):
    pass


class NoAnchors(CompileError):
    """No AMR concept matched a constant, rule, or relational value."""


class AmbiguousOrdinal(CompileError):
    pass


class OrdinalOutOfRange(CompileError):
    pass


class NoNumericCategory(CompileError):
    pass


class UnsupportedSpatialRelation(CompileError):
    pass


class UnboundVariable(CompileError):
    pass


# --------------------------------------------------------------- solver


class SolverError(Amr2AspError):
    pass


class UnsupportedStatement(SolverError):
    pass


class SolveTimeout(SolverError):
    pass


class BinaryNotFound(SolverError):
    pass


class ClingoError(SolverError):
    """Clingo exited with an error; carries its stderr verbatim."""

    def __init__(self, message: str, stderr: str = ""):
        super().__init__(message if not stderr else f"{message}\n{stderr}")
        self.stderr = stderr
