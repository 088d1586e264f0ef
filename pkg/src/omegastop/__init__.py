"""Optimal stopping for stable Levy processes killed by an omega-clock.

The top level re-exports the model constructors and the stopping solver;
the Levy exponents live in :mod:`omegastop.levy` and the Monte Carlo
machinery in :mod:`omegastop.simulate`.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DomainError,
    InadmissibleParameterError,
    NumericError,
    OmegaStopError,
    PoleError,
    RegimeError,
)
from .model import GainSpec, OmegaClock, StableModel, StableParams, make_model  # noqa: E402
from .stopping import Regime, StoppingSolution, classify_regime, solve, value_v  # noqa: E402

__all__ = [
    "__version__",
    "ConvergenceError",
    "DomainError",
    "GainSpec",
    "InadmissibleParameterError",
    "NumericError",
    "OmegaClock",
    "OmegaStopError",
    "PoleError",
    "Regime",
    "RegimeError",
    "StableModel",
    "StableParams",
    "StoppingSolution",
    "classify_regime",
    "make_model",
    "solve",
    "value_v",
]
