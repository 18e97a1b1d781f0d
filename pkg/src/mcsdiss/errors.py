"""Exception types shared across the package.

Each class carries a CLI exit code so the front end can map failures
without string matching.
"""


class MCSError(Exception):
    exit_code = 1


class DomainError(MCSError, ValueError):
    """Argument outside the mathematical domain of a function."""

    exit_code = 2


class RangeError(MCSError, OverflowError):
    """Result would overflow double precision."""

    exit_code = 2


class AccuracyError(MCSError):
    """Numerical procedure failed to reach its tolerance.

    Attributes
    ----------
    estimate : best value obtained
    error : error bound attached to ``estimate``
    """

    exit_code = 1

    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


class RegimeError(MCSError):
    """Parameters violate a validity condition of the model."""

    exit_code = 3


class RegularizationError(RegimeError):
    """An infrared-divergent integral was requested without a cutoff."""


class GapError(RegimeError):
    """Frequency lies inside the bath gap |omega| < |kappa|."""
