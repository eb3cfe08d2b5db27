"""Exception types shared across the package."""

from __future__ import annotations


class MinoscError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(MinoscError, ValueError):
    """A numeric parameter violates a documented precondition."""


class IllConditionedFitError(MinoscError):
    """Least-squares collocation system is rank deficient beyond ridge rescue."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class SolverStallError(MinoscError):
    """Linear solver failed to reach the requested residual within its cap."""

    def __init__(self, message: str, stats=None):
        super().__init__(message)
        self.stats = stats


class ContractionFailureError(MinoscError):
    """Fixed-point iteration stopped contracting (epsilon too large for the seed)."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class DegenerateLevelSetError(MinoscError):
    """A grid cell carries an identically zero field; shift the grid and retry."""


class CurveFileError(MinoscError):
    """Curve sample file could not be parsed."""

    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


class ConfigError(MinoscError):
    """Experiment configuration is invalid."""
