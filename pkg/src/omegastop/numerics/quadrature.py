"""Double-exponential quadrature on finite and semi-infinite ranges.

Both rules refine by halving the step of the trapezoidal sum in the
transformed variable, reusing every previous node.  The difference between
successive levels serves as the error estimate.

The finite-interval rule can hand the integrand the distances to both
endpoints, computed without cancellation.  Renewal-density integrals need
this: their singular factors live in ``1 - t`` as ``t`` approaches one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConvergenceError, NumericError

__all__ = [
    "QuadratureResult",
    "integrate_semi_infinite",
    "integrate_interval",
    "integrate_unit_batch",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-10
_HALF_PI = 0.5 * math.pi
_MIN_LEVEL = 3
_MAX_LEVEL = 12
_T_MAX = 6.8
_TINY = 1e-300


@dataclass(frozen=True)
class QuadratureResult:
    """Outcome of a quadrature call."""

    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.abs_error_estimate >= 0:
            raise ValueError("abs_error_estimate must be nonnegative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be positive")

    def __float__(self) -> float:
        return self.value


def _level_nodes(level: int) -> np.ndarray:
    """Nodes added at ``level`` on the symmetric grid ``t = k h``."""
    if level == 0:
        k = np.arange(-int(_T_MAX), int(_T_MAX) + 1)
        return k.astype(float)
    h = 2.0 ** -level
    n = int(_T_MAX / h)
    k = np.arange(-n, n + 1)
    k = k[k % 2 != 0]
    return k * h


def _weighted_sum(terms: np.ndarray, t: np.ndarray) -> float:
    bad = ~np.isfinite(terms)
    if np.any(bad):
        if np.any(bad & (np.abs(t) < 3.0)):
            raise NumericError("quadrature: non-finite integrand inside the range")
        terms = np.where(bad, 0.0, terms)
    return math.fsum(terms)


def _refine(level_sum: Callable[[int], tuple[float, int]], tol: float,
            max_level: int, rtol: float = 0.0) -> QuadratureResult:
    total, evals = level_sum(0)
    estimate = total
    previous = None
    error = math.inf
    for level in range(1, max_level + 1):
        part, n = level_sum(level)
        evals += n
        total += part
        estimate = total * 2.0 ** -level
        if previous is not None:
            error = abs(estimate - previous)
            if level >= _MIN_LEVEL and error <= max(tol, rtol * abs(estimate)):
                return QuadratureResult(estimate, error, max(evals, 1))
        previous = estimate
    raise ConvergenceError(
        f"quadrature did not reach tol={tol:g} within {max_level} levels",
        best_estimate=estimate,
        error_estimate=error,
    )


def integrate_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    lower: float,
    tol: float = DEFAULT_TOL,
    singular_at_lower: bool = False,
    *,
    with_offset: bool = False,
    rtol: float = 0.0,
    max_level: int = _MAX_LEVEL,
) -> QuadratureResult:
    """Integrate ``f`` over ``(lower, inf)`` with the exp-sinh rule.

    The substitution ``x = lower + exp(pi/2 sinh t)`` maps the half line to
    the real line, so both the tail decay and an algebraic singularity at
    ``lower`` become double-exponential decay in ``t``.

    Parameters
    ----------
    f : callable
        Vectorised integrand; receives an array of abscissae.
    lower : float
        Finite lower limit.
    tol : float
        Absolute tolerance on the change between refinement levels.
    singular_at_lower : bool
        Set when ``f`` has an integrable power singularity at ``lower``;
        nodes that would round onto ``lower`` itself are then skipped.
        For a strong singularity at a nonzero ``lower`` the skipped mass
        can matter; use ``with_offset`` instead.
    with_offset : bool
        Call ``f(x, x - lower)`` with the offset computed exactly.
    rtol : float
        Relative tolerance; refinement stops when either tolerance is met.

    Returns
    -------
    QuadratureResult

    Raises
    ------
    ConvergenceError
        When ``max_level`` refinements do not meet ``tol``; carries the best
        estimate.
    """
    lower = float(lower)
    if not math.isfinite(lower):
        raise ValueError("lower limit must be finite")

    def level_sum(level: int):
        t = _level_nodes(level)
        s = _HALF_PI * np.sinh(t)
        keep = (s > -700.0) & (s < 230.0)
        t, s = t[keep], s[keep]
        offset = np.exp(s)
        x = lower + offset
        if singular_at_lower and not with_offset:
            ok = x > lower
            t, s, offset, x = t[ok], s[ok], offset[ok], x[ok]
        w = _HALF_PI * np.cosh(t) * offset
        with np.errstate(all="ignore"):
            vals = f(x, offset) if with_offset else f(x)
            terms = w * np.asarray(vals, dtype=float)
        return _weighted_sum(terms, t), len(t)

    return _refine(level_sum, tol, max_level, rtol)


def integrate_interval(
    f: Callable[..., np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    *,
    with_offsets: bool = False,
    rtol: float = 0.0,
    max_level: int = _MAX_LEVEL,
) -> QuadratureResult:
    """Integrate ``f`` over the finite interval ``(a, b)`` with tanh-sinh.

    Parameters
    ----------
    f : callable
        Vectorised integrand.  Called as ``f(x)``, or as
        ``f(x, x - a, b - x)`` when ``with_offsets`` is set; the offsets are
        exact even where ``x`` itself rounds onto an endpoint.
    a, b : float
        Finite limits with ``a < b``.
    tol : float
        Absolute tolerance on the change between refinement levels.
    rtol : float
        Relative tolerance; refinement stops when either tolerance is met.
    """
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("limits must be finite")
    if b < a:
        raise ValueError("integrate_interval requires a < b")
    length = b - a
    if length == 0.0:
        return QuadratureResult(0.0, 0.0, 1)

    def level_sum(level: int):
        t = _level_nodes(level)
        s = _HALF_PI * np.sinh(t)
        e = np.exp(-2.0 * np.abs(s))
        small = length * e / (1.0 + e)  # distance to the nearer endpoint
        large = length / (1.0 + e)
        da = np.where(s < 0, small, large)
        db = np.where(s < 0, large, small)
        keep = (da > _TINY) & (db > _TINY)
        t, s, e, da, db = t[keep], s[keep], e[keep], da[keep], db[keep]
        w = length * math.pi * np.cosh(t) * e / (1.0 + e) ** 2
        x = np.where(s < 0, a + da, b - db)
        with np.errstate(all="ignore"):
            vals = f(x, da, db) if with_offsets else f(x)
            terms = w * np.asarray(vals, dtype=float)
        return _weighted_sum(terms, t), len(t)

    return _refine(level_sum, tol, max_level, rtol)


def integrate_unit_batch(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    rtol: float = 1e-12,
    *,
    max_level: int = _MAX_LEVEL,
) -> tuple[np.ndarray, np.ndarray]:
    """Tanh-sinh over ``(0, 1)`` for a batch of integrands sharing the nodes.

    ``f(v, 1 - v)`` must return an array of shape ``(batch, len(v))``.
    Refinement stops once every member changes by at most ``rtol`` relative
    to its own magnitude.

    Returns
    -------
    values, errors : ndarray
        Per-member estimates and their level-difference error estimates.
    """
    def level_terms(level: int):
        t = _level_nodes(level)
        s = _HALF_PI * np.sinh(t)
        e = np.exp(-2.0 * np.abs(s))
        small = e / (1.0 + e)
        large = 1.0 / (1.0 + e)
        v = np.where(s < 0, small, large)
        cv = np.where(s < 0, large, small)
        keep = (v > _TINY) & (cv > _TINY)
        t, e, v, cv = t[keep], e[keep], v[keep], cv[keep]
        w = math.pi * np.cosh(t) * e / (1.0 + e) ** 2
        with np.errstate(all="ignore"):
            terms = np.asarray(f(v, cv), dtype=float) * w
        bad = ~np.isfinite(terms)
        if np.any(bad):
            if np.any(bad & (np.abs(t) < 3.0)):
                raise NumericError("quadrature: non-finite integrand inside the range")
            terms = np.where(bad, 0.0, terms)
        return terms.sum(axis=-1)

    total = level_terms(0)
    previous = None
    for level in range(1, max_level + 1):
        total = total + level_terms(level)
        estimate = total * 2.0 ** -level
        if previous is not None:
            error = np.abs(estimate - previous)
            if level >= _MIN_LEVEL and np.all(error <= rtol * np.abs(estimate)):
                return estimate, error
        previous = estimate
    raise ConvergenceError(
        f"batched quadrature did not reach rtol={rtol:g} within {max_level} levels",
        best_estimate=float(np.max(estimate)),
        error_estimate=float(np.max(error)),
    )
