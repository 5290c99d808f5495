"""Provides the exception hierarchy shared by every solver component."""
from __future__ import annotations

from typing import Sequence


class DiophError(Exception):
    """Root of every error raised by the solver."""


class UnsupportedTerm(DiophError):
    """A term shape outside the expression model (e.g. ``x^y`` or ``0^x``)."""


class OverflowImpossible(DiophError):
    """Declared for completeness; arithmetic is arbitrary precision so it never fires."""


class NestedFraction(DiophError):
    """A denominator containing a sum."""


class ZeroDenominatorConstant(DiophError):
    """Division by the integer constant zero."""


class DomainViolation(DiophError):
    """Negative exponent or factorial argument during evaluation."""


class DomainUnbounded(DiophError):
    """Exponential or factorial variable whose domain admits negative values."""


class UnknownDomainName(DiophError):
    """Domain clause naming something other than Z, N, N0 or an interval."""


class NotApplicable(DiophError):
    """A solver or rewrite does not apply to the given equation."""


class StateBudgetExceeded(DiophError):
    """Residue state space larger than the configured budget."""


class BudgetExceeded(DiophError):
    """Enumeration or factorization work beyond the configured budget."""


class Timeout(DiophError):
    """Wall-clock soft budget exhausted."""


class BothZero(DiophError):
    """``extended_gcd(0, 0)``."""


class PerfectSquare(DiophError):
    """Pell parameter ``d`` is a perfect square."""


class ZeroTarget(DiophError):
    """Product form equated to zero; solved by the zero-form case split instead."""


class MalformedCertificate(DiophError):
    """Certificate or solutions payload missing required fields."""


class ProblemSyntaxError(DiophError):
    """Problem text that does not conform to the grammar."""

    def __init__(self, message: str, line: int, column: int, expected: Sequence[str] = ()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        detail = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{detail}")


class MalformedCorpus(DiophError):
    """Corpus file that is not valid TOML or whose cases fail validation."""
