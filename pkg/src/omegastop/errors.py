"""Exception hierarchy shared by all omegastop modules."""

from __future__ import annotations


class OmegaStopError(Exception):
    """Base class for every error raised by this package."""


class InadmissibleParameterError(OmegaStopError, ValueError):
    """Stable parameters or gain specification outside the admissible set."""


class NumericError(OmegaStopError, ArithmeticError):
    """A numerical routine could not produce a trustworthy value."""


class PoleError(NumericError):
    """A gamma function argument sits on (or within tolerance of) a pole."""


class DomainError(NumericError, ValueError):
    """An argument lies outside the domain where the formula is valid."""


class ConvergenceError(NumericError):
    """Iteration or quadrature budget exhausted before reaching tolerance.

    Attributes
    ----------
    best_estimate : float
        The most refined value available when the budget ran out.
    error_estimate : float
        Error estimate associated with ``best_estimate``.
    """

    def __init__(self, message: str, best_estimate: float = float("nan"),
                 error_estimate: float = float("inf")):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class RegimeError(OmegaStopError, ValueError):
    """Requested quantity does not exist in the current stopping regime."""
