"""Exception hierarchy for fn-lab. Each class carries the CLI exit code it maps to."""

from typing import Any


class FnLabError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1


class InputError(FnLabError):
    """Malformed input: bad index, space mismatch, role mismatch, bad generator spec."""

    exit_code = 2


class DocumentError(InputError):
    """A document failed to parse. `line` is 1-based, or None for whole-document problems."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class WitnessStructureError(InputError):
    """A witness is malformed (indices out of range, FN side conditions broken)."""


class PreconditionError(InputError):
    """An operation's hypothesis does not hold. The message names the failed hypothesis."""


class PropertyViolation(FnLabError):
    """A verified property failed. `counterexample` is printable and re-checkable."""

    exit_code = 1

    def __init__(self, message: str, counterexample: dict[str, Any] | None = None) -> None:
        self.counterexample = counterexample or {}
        super().__init__(message)


class IllegalMoveError(PropertyViolation):
    """A game strategy produced a family that breaks the reply rule."""


class BudgetExceeded(FnLabError):
    """A search or enumeration ran out of its node budget."""

    exit_code = 3

    def __init__(self, what: str, budget: int) -> None:
        self.budget = budget
        super().__init__(f"{what}: node budget of {budget} exceeded")
