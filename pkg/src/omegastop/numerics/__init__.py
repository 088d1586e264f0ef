"""Special functions and quadrature used by the analytic layers."""

from .gamma import POLE_TOLERANCE, gamma_ratio, log_gamma, rgamma
from .hypergeometric import gauss_2f1, hyp2f1_complement
from .quadrature import (
    DEFAULT_TOL,
    QuadratureResult,
    integrate_interval,
    integrate_semi_infinite,
    integrate_unit_batch,
)

__all__ = [
    "DEFAULT_TOL",
    "POLE_TOLERANCE",
    "QuadratureResult",
    "gamma_ratio",
    "gauss_2f1",
    "hyp2f1_complement",
    "integrate_interval",
    "integrate_semi_infinite",
    "integrate_unit_batch",
    "log_gamma",
    "rgamma",
]
