"""Exceptions and the non-integer result markers shared across the package."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class SubdirectError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(SubdirectError, ValueError):
    """An operation was called outside its documented domain."""


class ParseError(PreconditionError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        if line:
            where += f"{line}:{column}: "
        super().__init__(f"{where}{message}")


class CapExceeded(SubdirectError):
    """A bounded search hit its length cap before finding a witness."""


class UnsupportedError(SubdirectError):
    """The requested computation is not available for this representation."""


class InconsistencyError(SubdirectError, RuntimeError):
    """An identity that must hold failed; indicates an implementation fault."""


class Infinity(enum.Enum):
    INFINITE = "INFINITE"

    def __repr__(self) -> str:
        return "INFINITE"

    def __str__(self) -> str:
        return "INFINITE"


INFINITE = Infinity.INFINITE


@dataclass(frozen=True)
class Unknown:
    """An index or length that could not be decided, with the reason."""

    reason: str

    def __str__(self) -> str:
        return f"UNKNOWN ({self.reason})"


def is_finite(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)
