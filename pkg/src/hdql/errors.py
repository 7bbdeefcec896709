"""Exception hierarchy.  Every evaluation failure carries a machine-readable ``code``."""

from __future__ import annotations

from typing import Optional


class HDQLError(Exception):
    code = "ERROR"


class ParseError(HDQLError):
    code = "PARSE-ERROR"

    def __init__(self, message: str, line: int = 0, col: int = 0, filename: str = "<input>"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename

    def __str__(self) -> str:
        return f"{self.filename}:{self.line}:{self.col}: {self.message}"


class ModelError(HDQLError):
    code = "MODEL-INVALID"


class EvaluationError(HDQLError):
    """Evaluation could not produce a verdict; ``subject`` is the offending sub-sentence."""

    def __init__(self, message: str, subject: Optional[object] = None):
        super().__init__(message)
        self.subject = subject


class BudgetExceeded(EvaluationError):
    code = "BUDGET-EXCEEDED"


class NotRepresentable(EvaluationError):
    code = "NOT-REPRESENTABLE"


class GlobalNotDecidable(EvaluationError):
    code = "GLOBAL-NOT-DECIDABLE"


class UndefinedMeasurement(EvaluationError):
    code = "UNDEFINED-MEASUREMENT"


class UnboundVariable(EvaluationError):
    code = "UNBOUND-VARIABLE"


class ProgramUnsat(HDQLError):
    code = "PROGRAM-UNSAT"

    def __init__(self, message: str, violation=None):
        super().__init__(message)
        self.violation = violation
