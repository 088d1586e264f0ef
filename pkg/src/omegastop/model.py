"""Stable-process parameters, the omega-clock and their derived constants.

A model is the triple (alpha, rho, k): index, positivity parameter and
killing coefficient of the rate ``omega(x) = k (-x)^(-alpha)`` on ``x < 0``.
Everything downstream is expressed through the Levy intensities ``c_plus``,
``c_minus``, the per-excursion killing probability ``p``, the exponent
``delta`` and the killing rate ``q`` of the Lamperti process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InadmissibleParameterError, NumericError
from .numerics.gamma import gamma_ratio

__all__ = [
    "StableParams",
    "OmegaClock",
    "StableModel",
    "GainSpec",
    "validate_params",
    "intensity_constants",
    "killing_probability",
    "compute_delta",
    "delta_identity_residual",
    "symmetric_delta",
    "omega_rate",
    "q_from_gammas",
    "q_from_intensities",
    "make_model",
]

_SMALL_INCREMENT = 0.1
_ARCCOS_SPILL = 1e-14


@dataclass(frozen=True)
class StableParams:
    """Index ``alpha`` and positivity parameter ``rho`` of a stable process.

    Construct through :func:`validate_params` (or directly; the constructor
    runs the same admissibility check).
    """

    alpha: float
    rho: float

    def __post_init__(self):
        _check_admissible(self.alpha, self.rho)

    @property
    def rho_hat(self) -> float:
        return 1.0 - self.rho

    @property
    def alpha_rho(self) -> float:
        return self.alpha * self.rho

    @property
    def alpha_rho_hat(self) -> float:
        return self.alpha * (1.0 - self.rho)


@dataclass(frozen=True)
class OmegaClock:
    """Killing coefficient ``k >= 0`` of the omega-clock."""

    k: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k >= 0):
            raise InadmissibleParameterError(f"killing coefficient must be finite and >= 0, got {self.k}")

    def rate(self, x: float, alpha: float) -> float:
        return 0.0 if x >= 0 else self.k * (-x) ** (-alpha)


@dataclass(frozen=True)
class GainSpec:
    """Gain ``g(x) = (x^r - K)^+`` on ``x >= 0`` and zero below."""

    r: float
    strike: float

    def __post_init__(self):
        if not math.isfinite(self.r) or self.r == 0:
            raise InadmissibleParameterError("payoff exponent r must be finite and nonzero")
        if not (math.isfinite(self.strike) and self.strike > 0):
            raise InadmissibleParameterError("strike K must be finite and positive")

    @property
    def K(self) -> float:
        return self.strike

    def payoff(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return max(x ** self.r - self.strike, 0.0)


@dataclass(frozen=True)
class StableModel:
    """Admissible stable parameters with an omega-clock and derived constants.

    Use :func:`make_model`; the derived fields are filled in there and never
    recomputed, so the object is safe to share between workers.
    """

    params: StableParams
    clock: OmegaClock
    c_plus: float
    c_minus: float
    p: float
    delta: float
    q: float
    identity_residual: float = field(default=0.0, compare=False)

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def rho(self) -> float:
        return self.params.rho

    @property
    def k(self) -> float:
        return self.clock.k

    def omega(self, x: float) -> float:
        return self.clock.rate(x, self.params.alpha)

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "rho": self.rho,
            "k": self.k,
            "c_plus": self.c_plus,
            "c_minus": self.c_minus,
            "p": self.p,
            "delta": self.delta,
            "q": self.q,
        }


def _check_admissible(alpha: float, rho: float) -> None:
    if not (math.isfinite(alpha) and math.isfinite(rho)):
        raise InadmissibleParameterError("alpha and rho must be finite")
    if not 0 < alpha < 2:
        raise InadmissibleParameterError(
            f"alpha={alpha} outside (0, 2): Brownian motion and beyond are excluded"
        )
    if alpha < 1:
        if not 0 < rho < 1:
            raise InadmissibleParameterError(
                f"alpha in (0,1) branch requires rho in (0,1), got rho={rho}"
            )
    elif alpha == 1:
        if rho != 0.5:
            raise InadmissibleParameterError(
                f"alpha=1 branch admits only the symmetric case rho=1/2, got rho={rho}"
            )
    else:
        lo, hi = 1.0 - 1.0 / alpha, 1.0 / alpha
        if not lo < rho < hi:
            raise InadmissibleParameterError(
                f"alpha in (1,2) branch requires rho in ({lo:.6g}, {hi:.6g}), got rho={rho}"
            )


def validate_params(alpha: float, rho: float) -> StableParams:
    """Return :class:`StableParams` or raise naming the violated branch."""
    return StableParams(float(alpha), float(rho))


def intensity_constants(params: StableParams) -> tuple[float, float]:
    """Levy density coefficients ``(c_plus, c_minus)`` of the stable process."""
    a, ar, arh = params.alpha, params.alpha_rho, params.alpha_rho_hat
    c_plus = float(gamma_ratio((a + 1.0,), (ar, 1.0 - ar)))
    c_minus = float(gamma_ratio((a + 1.0,), (arh, 1.0 - arh)))
    return c_plus, c_minus


def killing_probability(params: StableParams, clock: OmegaClock) -> float:
    """Probability ``k / (c_plus/alpha + k)`` of dying in one negative excursion."""
    c_plus, _ = intensity_constants(params)
    k = clock.k
    if math.isinf(k):
        return 1.0
    return k / (c_plus / params.alpha + k)


def compute_delta(params: StableParams, p: float) -> float:
    """Exponent ``delta`` from the closed arccos formula.

    ``delta = (alpha - phi/pi)/2`` with ``cos phi = p cos(pi(a rho - a rho_hat))
    + (1-p) cos(pi alpha)``.  ``phi`` is taken from half-angle forms whose
    inputs ``1 -+ cos phi`` are sums of nonnegative terms, so neither end of
    ``[0, pi]`` loses precision.  Near ``p = 0`` the work is done in the
    supplementary angle ``psi = pi - phi``: its increment ``D`` over the
    limit ``psi0 = pi |1 - alpha|`` solves
    ``2 sin(psi0 + D/2) sin(D/2) = 2 p sin(pi a rho) sin(pi a rho_hat)``,
    and a few Newton steps on that equation avoid subtracting nearly equal
    angles.  ``p = 0`` returns ``max(0, alpha - 1)`` exactly.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    a, ar, arh = params.alpha, params.alpha_rho, params.alpha_rho_hat
    base = max(0.0, a - 1.0)
    if p == 0.0:
        return base
    spread = 2.0 * math.sin(math.pi * ar) * math.sin(math.pi * arh)
    one_minus = 2.0 * math.sin(0.5 * math.pi * (ar - arh)) ** 2 + (1.0 - p) * spread
    one_plus = 2.0 * math.cos(0.5 * math.pi * a) ** 2 + p * spread
    if one_minus <= one_plus:
        phi = 2.0 * math.asin(min(math.sqrt(0.5 * one_minus), 1.0))
        psi = math.pi - phi
    else:
        psi = 2.0 * math.asin(min(math.sqrt(0.5 * one_plus), 1.0))
        phi = math.pi - psi
    psi0 = math.pi * abs(1.0 - a)
    inc = psi - psi0
    if inc >= _SMALL_INCREMENT:
        return 0.5 * (a - phi / math.pi)
    rhs = p * spread
    if inc <= 0.0:
        inc = rhs / max(math.sin(psi0), math.sqrt(rhs))
    for _ in range(60):
        step = (2.0 * math.sin(psi0 + 0.5 * inc) * math.sin(0.5 * inc) - rhs) / math.sin(psi0 + inc)
        inc -= step
        if abs(step) <= 1e-16 * inc:
            break
    return base + inc / (2.0 * math.pi)


def delta_identity_residual(params: StableParams, p: float, delta: float) -> float:
    """``|(1-p) sin(pi a rho) sin(pi a rho_hat) - sin(pi(a rho - d)) sin(pi(a rho_hat - d))|``."""
    ar, arh = params.alpha_rho, params.alpha_rho_hat
    lhs = (1.0 - p) * math.sin(math.pi * ar) * math.sin(math.pi * arh)
    rhs = math.sin(math.pi * (ar - delta)) * math.sin(math.pi * (arh - delta))
    return abs(lhs - rhs)


def symmetric_delta(alpha: float, p: float) -> float:
    """``delta`` for ``rho = 1/2`` via the arcsin form."""
    s = math.sqrt(max(1.0 - p, 0.0)) * math.sin(0.5 * math.pi * alpha)
    return 0.5 * alpha - math.asin(min(s, 1.0)) / math.pi


def omega_rate(x: float, clock: OmegaClock, params: StableParams) -> float:
    """Killing rate at state ``x``."""
    return clock.rate(x, params.alpha)


def q_from_gammas(params: StableParams, delta: float) -> float:
    """Lamperti killing rate as a ratio of gamma functions."""
    a, ar = params.alpha, params.alpha_rho
    return float(gamma_ratio(
        (ar, a, 1.0 - ar),
        (delta, a - delta, delta + 1.0 - a, 1.0 - delta),
    ))


def q_from_intensities(params: StableParams, clock: OmegaClock) -> float:
    """Lamperti killing rate ``(c_minus/alpha) * p``."""
    c_plus, c_minus = intensity_constants(params)
    return c_minus / params.alpha * killing_probability(params, clock)


def make_model(alpha: float, rho: float, k: float) -> StableModel:
    """Validate parameters and compute every derived constant.

    Raises
    ------
    InadmissibleParameterError
        If ``(alpha, rho)`` is not admissible or ``k < 0``.
    """
    params = validate_params(alpha, rho)
    clock = OmegaClock(float(k))
    c_plus, c_minus = intensity_constants(params)
    p = killing_probability(params, clock)
    delta = compute_delta(params, p)
    residual = delta_identity_residual(params, p, delta)
    q = c_minus / params.alpha * p
    return StableModel(params, clock, c_plus, c_minus, p, delta, q, residual)
