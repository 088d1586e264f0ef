"""Chambers-Mallows-Stuck sampling in the (alpha, rho) normalisation.

The target process has Levy density ``c_plus x^{-1-alpha}`` on ``x > 0`` and
``c_minus |x|^{-1-alpha}`` on ``x < 0``.  That is the strictly stable law
``S_alpha(sigma, beta, 0)`` with ``beta = (c_plus - c_minus)/(c_plus + c_minus)``
and ``sigma^alpha = -(c_plus + c_minus) Gamma(-alpha) cos(pi alpha / 2)``
(``(c_plus + c_minus) pi / 2`` at ``alpha = 1``).  An increment over time
``h`` is ``sigma h^{1/alpha}`` times a standard draw.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..errors import InadmissibleParameterError
from ..model import StableParams, intensity_constants

__all__ = [
    "rho_to_skewness",
    "skewness_to_rho",
    "cms_constants",
    "stable_scale",
    "cms_standard",
    "sample_stable_increment",
]


def rho_to_skewness(params: StableParams) -> float:
    """Skewness ``beta`` with ``rho = 1/2 + arctan(beta tan(pi alpha/2)) / (pi alpha)``."""
    a, rho = params.alpha, params.rho
    if a == 1.0:
        if rho != 0.5:
            raise InadmissibleParameterError("alpha = 1 is supported only for rho = 1/2")
        return 0.0
    beta = math.tan(math.pi * a * (rho - 0.5)) / math.tan(0.5 * math.pi * a)
    return min(1.0, max(-1.0, beta))


def skewness_to_rho(alpha: float, beta: float) -> float:
    """Inverse of :func:`rho_to_skewness`."""
    if alpha == 1.0:
        return 0.5
    return 0.5 + math.atan(beta * math.tan(0.5 * math.pi * alpha)) / (math.pi * alpha)


def stable_scale(params: StableParams) -> float:
    """``sigma`` such that ``sigma h^{1/alpha} S`` matches the paper's intensities."""
    a = params.alpha
    c_plus, c_minus = intensity_constants(params)
    if a == 1.0:
        sig_a = (c_plus + c_minus) * 0.5 * math.pi
    else:
        sig_a = -(c_plus + c_minus) * math.gamma(-a) * math.cos(0.5 * math.pi * a)
    return sig_a ** (1.0 / a)


def cms_constants(params: StableParams) -> tuple[float, float, float]:
    """``(B, S, sigma)`` used by the sampler."""
    a = params.alpha
    beta = rho_to_skewness(params)
    if a == 1.0:
        return 0.0, 1.0, stable_scale(params)
    tan_half = math.tan(0.5 * math.pi * a)
    B = math.atan(beta * tan_half) / a
    S = (1.0 + (beta * tan_half) ** 2) ** (0.5 / a)
    return B, S, stable_scale(params)


@njit(cache=True)
def cms_standard(alpha, B, S, u1, u2):
    """Standard ``S_alpha(1, beta, 0)`` draw from two uniforms on ``(0, 1)``."""
    v = math.pi * (u1 - 0.5)
    if alpha == 1.0:
        return math.tan(v)
    w = -math.log(u2)
    ab = alpha * (v + B)
    return (S * math.sin(ab) / math.cos(v) ** (1.0 / alpha)
            * (math.cos(v - ab) / w) ** ((1.0 - alpha) / alpha))


def _cms_vector(alpha, B, S, u1, u2):
    v = np.pi * (u1 - 0.5)
    if alpha == 1.0:
        return np.tan(v)
    w = -np.log(u2)
    ab = alpha * (v + B)
    return (S * np.sin(ab) / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - ab) / w) ** ((1.0 - alpha) / alpha))


def sample_stable_increment(rng, dt: float, params: StableParams, size=None):
    """Increment of the stable process over a time step ``dt``.

    Parameters
    ----------
    rng : numpy.random.Generator or PhiloxStream
        Anything with a ``random(size)`` method returning uniforms on (0, 1).
    dt : float
        Time step, positive.
    params : StableParams
    size : int, optional
        Number of draws; a float is returned when omitted.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    B, S, sigma = cms_constants(params)
    n = 1 if size is None else int(size)
    u1 = np.asarray(rng.random(n), dtype=float)
    u2 = np.asarray(rng.random(n), dtype=float)
    u1 = np.where(u1 <= 0.0, 0.5, u1)
    u2 = np.where(u2 <= 0.0, 0.5, u2)
    out = sigma * dt ** (1.0 / params.alpha) * _cms_vector(params.alpha, B, S, u1, u2)
    return float(out[0]) if size is None else out
