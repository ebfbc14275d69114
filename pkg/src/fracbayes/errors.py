"""Exception types shared across the package.

Configuration problems and numerical failures are kept distinct so the CLI
can map them to different exit codes (2 and 3 respectively).
"""


class ConfigError(ValueError):
    """A config file failed to parse or validate."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (factorization, solve, divergence)."""


class ConvergenceError(NumericalError):
    """An adaptive refinement did not reach the requested tolerance."""


class FactorizationError(NumericalError):
    """Covariance factorization failed even after jitter escalation."""


class SingularSystemError(NumericalError):
    """A discrete linear system was singular or produced non-finite values."""
