"""Exception types shared across the package.

Validation problems derive from ``ValueError`` and numerical or resource
failures from ``RuntimeError``; the CLI maps them to exit codes 1 and 2.
"""


class ConfigurationError(ValueError):
    """Invalid parameter block or receiver configuration."""


class NoHypothesisError(ValueError):
    """All four states were eliminated, so no hypothesis remains to test."""


class ResourceLimitError(RuntimeError):
    """Requested computation exceeds a configured size cap."""


class ConvergenceError(RuntimeError):
    """Iterative solver or series failed to converge within its cap."""
