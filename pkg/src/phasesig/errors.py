"""Exception hierarchy for phasesig."""

from __future__ import annotations


class PhaseSigError(Exception):
    """Base class for all library errors."""


class InvalidSystemError(PhaseSigError, ValueError):
    """A phased system failed validation."""

    def __init__(self, report):
        self.report = report
        lines = "; ".join(str(v) for v in report.violations)
        super().__init__(f"invalid phased system: {lines}")


class MissingAtomError(PhaseSigError, KeyError):
    """A structure expression references a component with no state."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing atom"


class InconsistentTrajectoryError(PhaseSigError, ValueError):
    """A mission trajectory revives a failed component."""


class RelaxationError(PhaseSigError, ValueError):
    """Exponential meta-type relaxation requested for a type that cannot be relaxed."""


class InfeasibleLevelError(PhaseSigError, ValueError):
    """A level vector violates the functioning-count recursion."""


class TooLargeError(PhaseSigError, ValueError):
    """Brute-force enumeration requested beyond its size guard."""


class UndefinedConditionalError(PhaseSigError, ValueError):
    """Conditional distribution requested after certain failure."""


class OutOfMissionError(PhaseSigError, ValueError):
    """Evaluation time lies outside the mission window, or its side is ambiguous."""


class SpecSyntaxError(PhaseSigError):
    """Malformed system specification text."""

    def __init__(self, message: str, line: int, col: int, token: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.token = token
        where = f"line {line}, column {col}"
        tok = f" near {token!r}" if token is not None else ""
        super().__init__(f"{where}: {message}{tok}")


class SpecSemanticError(PhaseSigError):
    """Specification parsed but describes an invalid system."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(str(v) for v in report.violations))
