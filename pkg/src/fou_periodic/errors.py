"""
Exception hierarchy for fou-periodic.

Every error carries a numeric exit code, a message and optional details,
so the CLI and the MCP server can render them uniformly.
"""

from typing import Any

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class FouError(Exception):
    """Base exception for all toolkit errors."""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str, details: Any = None):
        self.message = message
        self.details = details
        super().__init__(f"{type(self).__name__}: {message}")


class ConfigurationError(FouError):
    """Invalid basis, drift or experiment configuration."""

    exit_code = EXIT_USAGE


class UsageError(FouError):
    """Bad command-line usage or a missing prerequisite artifact."""

    exit_code = EXIT_USAGE


class ResultParseError(FouError):
    """A result file could not be parsed."""

    exit_code = EXIT_USAGE

    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}", {"path": path, "line": line})


class DomainError(FouError):
    """Argument outside the mathematical domain of an operation."""


class EmbeddingError(FouError):
    """Circulant embedding produced a significantly negative eigenvalue."""


class NumericalError(FouError):
    """Numerical failure, e.g. Cholesky on a non positive definite matrix."""


class OverflowGuardError(FouError):
    """alpha * horizon exceeds the safe exponential range."""


class DegenerateDesignError(FouError):
    """The path lies numerically in the span of the basis; the estimator is undefined."""
