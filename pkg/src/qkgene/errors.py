"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so every stage raises one of
the three families below instead of bare ValueError where the failure is
user-visible: ConfigError for bad settings, DataError for bad input data,
NumericalError for failures of the numerical machinery itself.
"""


class ConfigError(ValueError):
    """A configuration key, value, or combination is invalid."""


class DataError(ValueError):
    """Input data violates a contract (shape, labels, parse failure)."""


class NumericalError(RuntimeError):
    """A numerical routine failed (rank deficiency, non-convergence)."""


class ConvergenceError(NumericalError):
    """An iterative solver hit its update budget before converging."""

    def __init__(self, message: str, kkt_violation: float | None = None):
        super().__init__(message)
        self.kkt_violation = kkt_violation
