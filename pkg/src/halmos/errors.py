"""Exception hierarchy and the shared size budget."""

from __future__ import annotations

import os

DEFAULT_BUDGET = 1 << 24


class HalmosError(Exception):
    """Base class for all errors raised by the package."""


class SignatureMismatch(HalmosError):
    pass


class SpaceMismatch(HalmosError):
    """Two point sets live over different variables or algebras."""


class ResourceError(HalmosError):
    """A computation would exceed the configured size budget."""

    def __init__(self, what: str, required: int, budget: int):
        super().__init__(f"{what} needs {required} entries, budget is {budget}")
        self.required = required
        self.budget = budget


class ParseError(HalmosError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def default_budget() -> int:
    """Size budget in points; ``HALMOS_BUDGET`` overrides the built-in cap."""
    raw = os.environ.get("HALMOS_BUDGET")
    if raw:
        value = int(raw)
        if value <= 0:
            raise ValueError("HALMOS_BUDGET must be positive")
        return value
    return DEFAULT_BUDGET


def check_budget(what: str, required: int, budget: int | None = None) -> None:
    limit = default_budget() if budget is None else budget
    if required > limit:
        raise ResourceError(what, required, limit)
