"""Characteristic exponent of the Lamperti process and its Wiener-Hopf factors.

Erasing the negative excursions of the omega-killed stable process and
applying the Lamperti transform yields a killed Levy process ``xi``.  Its
exponent is available two ways: as the sum of the pieces it is assembled
from (``psi_structural``) and as a single ratio of eight gamma functions
(``psi_closed``).  The closed form splits as ``kappa(-i theta) *
kappa_hat(i theta)``, the ascending and descending ladder-height exponents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .model import StableModel
from .numerics.gamma import gamma_ratio, log_gamma

__all__ = [
    "ExponentValue",
    "FactorPair",
    "FactorEvaluation",
    "psi_star",
    "psi_cpp",
    "psi_structural",
    "psi_closed",
    "kappa",
    "kappa_hat",
    "kappa_complex",
    "kappa_hat_complex",
    "factor_pair",
    "factorization_residual",
    "evaluate_factors",
    "double_hypergeometric_parameters",
    "in_class_o",
]


@dataclass(frozen=True)
class ExponentValue:
    theta: complex
    psi: complex


@dataclass(frozen=True)
class FactorPair:
    """Real-argument Wiener-Hopf factors bound to one model."""

    kappa_at: Callable[[float], float]
    kappa_hat_at: Callable[[float], float]
    q: float


@dataclass(frozen=True)
class FactorEvaluation:
    """Exponent and factor values at one ``theta`` with consistency residuals."""

    theta: complex
    psi_closed: complex
    psi_structural: complex
    kappa_up: complex
    kappa_down: complex
    structural_gap: float
    factorization_residual: float


def _theta(theta):
    arr = np.asarray(theta, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("theta must be finite")
    return arr


def _out(value):
    return complex(value) if np.ndim(value) == 0 else value


def psi_star(theta, model: StableModel):
    """Exponent of the Lamperti process of the stable process killed below zero."""
    it = 1j * _theta(theta)
    a, arh = model.alpha, model.params.alpha_rho_hat
    return _out(gamma_ratio((a - it, 1.0 + it), (arh - it, 1.0 - arh + it)))


def psi_cpp(theta, model: StableModel):
    """Exponent of the compound Poisson part with jump rate ``c_minus/alpha``."""
    it = 1j * _theta(theta)
    a, ar = model.alpha, model.params.alpha_rho
    # pair each gamma with its theta = 0 value so 1 - ratio keeps relative accuracy
    log_ratio = ((log_gamma(1.0 - ar + it) - log_gamma(1.0 - ar))
                 + (log_gamma(ar - it) - log_gamma(ar))
                 + (log_gamma(1.0 + it) - log_gamma(1.0))
                 + (log_gamma(a - it) - log_gamma(a)))
    return _out(-model.c_minus / a * np.expm1(log_ratio))


def psi_structural(theta, model: StableModel):
    """``psi_star + (1-p) psi_cpp - (1-p) c_minus/alpha``."""
    keep = 1.0 - model.p
    rate = model.c_minus / model.alpha
    value = (np.asarray(psi_star(theta, model)) + keep * np.asarray(psi_cpp(theta, model))
             - keep * rate)
    return _out(value)


def psi_closed(theta, model: StableModel):
    """Closed four-over-four gamma ratio for the exponent of ``xi``."""
    it = 1j * _theta(theta)
    a, ar, d = model.alpha, model.params.alpha_rho, model.delta
    return _out(gamma_ratio(
        (a - it, ar - it, 1.0 + it, 1.0 - ar + it),
        (a - d - it, d - it, d + 1.0 - a + it, 1.0 - d + it),
    ))


def kappa_complex(z, model: StableModel):
    """Ascending factor continued to complex ``z``."""
    z = np.asarray(z, dtype=complex)
    a, ar, d = model.alpha, model.params.alpha_rho, model.delta
    return _out(gamma_ratio((ar + z, a + z), (d + z, a - d + z)))


def kappa_hat_complex(z, model: StableModel):
    """Descending factor continued to complex ``z``."""
    z = np.asarray(z, dtype=complex)
    a, ar, d = model.alpha, model.params.alpha_rho, model.delta
    return _out(gamma_ratio((1.0 - ar + z, 1.0 + z), (d + 1.0 - a + z, 1.0 - d + z)))


def _real_arg(z):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("argument must be finite")
    return arr


def kappa(z, model: StableModel):
    """Ascending ladder-height Laplace exponent ``kappa(q, z)`` for ``z > -alpha rho``.

    Raises
    ------
    DomainError
        If any ``z <= -alpha rho``.
    """
    arr = _real_arg(z)
    if np.any(arr <= -model.params.alpha_rho):
        raise DomainError(f"kappa defined for z > {-model.params.alpha_rho}")
    a, ar, d = model.alpha, model.params.alpha_rho, model.delta
    val = gamma_ratio((ar + arr, a + arr), (d + arr, a - d + arr))
    return float(val) if np.ndim(val) == 0 else val


def kappa_hat(z, model: StableModel):
    """Descending ladder-height Laplace exponent ``kappa_hat(q, z)`` for ``z > alpha rho - 1``."""
    arr = _real_arg(z)
    lower = model.params.alpha_rho - 1.0
    if np.any(arr <= lower):
        raise DomainError(f"kappa_hat defined for z > {lower}")
    a, ar, d = model.alpha, model.params.alpha_rho, model.delta
    val = gamma_ratio((1.0 - ar + arr, 1.0 + arr), (d + 1.0 - a + arr, 1.0 - d + arr))
    return float(val) if np.ndim(val) == 0 else val


def factor_pair(model: StableModel) -> FactorPair:
    return FactorPair(
        kappa_at=lambda z: kappa(z, model),
        kappa_hat_at=lambda z: kappa_hat(z, model),
        q=model.q,
    )


def factorization_residual(theta, model: StableModel):
    """``|psi(theta) - kappa(-i theta) kappa_hat(i theta)| / (1 + |psi(theta)|)``."""
    th = _theta(theta)
    psi = np.asarray(psi_closed(th, model))
    prod = np.asarray(kappa_complex(-1j * th, model)) * np.asarray(kappa_hat_complex(1j * th, model))
    res = np.abs(psi - prod) / (1.0 + np.abs(psi))
    return float(res) if np.ndim(res) == 0 else res


def evaluate_factors(theta: complex, model: StableModel) -> FactorEvaluation:
    """Evaluate both exponent routes and the factorisation at one ``theta``."""
    closed = psi_closed(theta, model)
    structural = psi_structural(theta, model)
    up = kappa_complex(-1j * theta, model)
    down = kappa_hat_complex(1j * theta, model)
    return FactorEvaluation(
        theta=complex(theta),
        psi_closed=closed,
        psi_structural=structural,
        kappa_up=up,
        kappa_down=down,
        structural_gap=abs(closed - structural) / max(abs(closed), 1e-300),
        factorization_residual=abs(closed - up * down) / (1.0 + abs(closed)),
    )


def double_hypergeometric_parameters(model: StableModel):
    """Parameter quadruples of the ascending and descending factors."""
    a, ar, d = model.alpha, model.params.alpha_rho, model.delta
    return (ar, a, d, a - d), (1.0 - ar, 1.0, d + 1.0 - a, 1.0 - d)


def in_class_o(a: float, b: float, c: float, d: float, n: int = 0, slack: float = 0.0) -> bool:
    """Condition (i) of the double hypergeometric class for a given ``n``."""
    return (c + n <= a + n + slack and a + n <= d + slack and d <= b + slack
            and b <= c + n + 1 + slack and min(a, b, c, d) >= -slack)
