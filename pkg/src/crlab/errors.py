"""Exception types shared across the package."""

from __future__ import annotations


class CrlabError(Exception):
    """Base class for all package errors."""


class ParseError(CrlabError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} (at position {pos})")


class IndexUsageError(CrlabError):
    """Label used three times, bartype mismatch, reeb contraction, ..."""


class WeightMismatchError(CrlabError):
    """Terms of a sum carry different CR weights."""


class RewriteError(CrlabError):
    """A rewrite rule was applied outside its domain."""


class ReductionError(CrlabError):
    """An expression does not reduce into the requested span."""


class EvaluationError(CrlabError):
    """Model evaluation failed (chart singularity, unrealizable species)."""
