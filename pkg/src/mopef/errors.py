"""Exception types shared across the package.

All domain failures derive from :class:`MopefError` so the CLI can map
them to exit code 1 with a structured message.
"""

from __future__ import annotations


class MopefError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MopefError):
    """Invalid input data; carries the complete list of violations."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DimensionMismatchError(MopefError):
    """Two vectors (or a vector and an instance) disagree on length."""


class ParseError(MopefError):
    """Expression syntax error with a character offset."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at offset {position})")


class EvaluationError(MopefError):
    """Expression evaluation failed (domain error, non-finite result)."""


class DomainError(MopefError):
    """A value lies outside the mathematical domain of an operation."""
