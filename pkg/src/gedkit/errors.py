"""Exception types shared across the package."""

from __future__ import annotations


class GedError(Exception):
    """Base class for all package errors."""


class ValidationError(GedError, ValueError):
    """Malformed input: invalid node map, bad matrix entry, out-of-range index."""


class BoundViolation(ValidationError):
    """A reported lower bound exceeds its upper bound; signals a solver bug."""


class ConfigurationError(GedError):
    """A method was asked to run with costs or options it does not support."""


class ParseError(GedError):
    """A GXL or collection file could not be read."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class BudgetExceeded(GedError):
    """An exact search ran out of its memory or time budget.

    Carries the best bounds known at the time of the abort.
    """

    def __init__(self, message: str, lower_bound: float, upper_bound: float, node_map=None):
        self.lower_bound = lower_bound
        self.upper_bound = upper_bound
        self.node_map = node_map
        super().__init__(f"{message} (best bounds: [{lower_bound}, {upper_bound}])")


class CapExceeded(GedError):
    """The brute-force oracle refuses instances above its size cap."""
