"""Exception types raised across the package."""

from __future__ import annotations


class ExtSourceError(Exception):
    """Base class for all package errors."""


class DomainError(ExtSourceError, ValueError):
    """An argument lies outside the domain of an operation."""


class RegimeError(ExtSourceError, ValueError):
    """The source strength is outside the regime an operation supports."""


class ConvergenceError(ExtSourceError, RuntimeError):
    """An iterative solver exhausted its budget.

    Parameters
    ----------
    message : str
        Human readable description.
    residual : float
        Last residual reached before giving up.
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class ConfigError(ExtSourceError, ValueError):
    """Invalid experiment configuration."""
