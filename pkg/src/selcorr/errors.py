"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SelectionViolationError(DomainError):
    """An observation was passed to a conditional estimator without being selected."""


class ConvergenceError(RuntimeError):
    """A numerical solver failed to converge.

    Carries the best bracket found so callers can diagnose or retry with a
    different configuration.
    """

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class FitError(RuntimeError):
    """Model fitting failed on degenerate data."""
