"""Exception hierarchy shared by the engine, the oracle and the CLI."""

from __future__ import annotations


class ValzError(Exception):
    """Base class for every error raised by valz."""


class DomainError(ValzError, ValueError):
    """An argument lies outside the domain of an operation."""


class UsageError(ValzError, ValueError):
    """An operation was called with a structurally invalid argument (e.g. empty list)."""


class DepthExceeded(ValzError):
    """A chain query needs a level beyond a prefix-only chain."""


class PreconditionError(ValzError):
    """A documented side condition of an operation does not hold."""


class ParseError(ValzError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class SortError(ParseError):
    """A variable is used at the wrong sort."""


class UnsupportedFragment(ValzError):
    """The input lies outside the fragment the engine decides."""


class ResourceLimit(ValzError):
    """A configured size cap (DNF clauses, enumeration modulus, ...) was hit."""


class OracleMismatch(ValzError):
    """Engine and brute-force oracle disagree."""
