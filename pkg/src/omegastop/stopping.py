"""Optimal stopping of the omega-killed stable process with a power gain.

The gain is ``g(x) = (x^r - K)^+`` on ``x > 0``.  After erasing negative
excursions and applying the Lamperti transform the problem becomes a
perpetual option on the killed Levy process ``xi``:

* ``0 < r < delta`` (call side): stop at the first passage of ``X`` above
  ``b*``; the value is an integral against the ascending renewal density
  ``u``.
* ``-(delta + 1 - alpha) < r < 0`` (put side): stop on the first entry into
  ``(0, 1/b*]``; the value uses the descending renewal density ``u_hat``.
* outside the closed window the value is infinite.  On the two endpoints
  the theory is silent and the regime is reported as ``Boundary`` without
  a value.

Integrals run in the log-space variable ``z`` with an exp-sinh rule, so the
slowly decaying tails near the regime boundary are not truncated.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, InadmissibleParameterError, RegimeError
from .levy import kappa, kappa_hat
from .model import GainSpec, StableModel
from .numerics.gamma import gamma_ratio, log_gamma
from .numerics.hypergeometric import hyp2f1_complement
from .numerics.quadrature import (
    integrate_interval,
    integrate_semi_infinite,
    integrate_unit_batch,
)

__all__ = [
    "Regime",
    "StoppingSolution",
    "classify_regime",
    "mgf_sup",
    "mgf_inf",
    "threshold_b_star",
    "renewal_density_u",
    "renewal_density_u_hat",
    "ascending_factor_densities",
    "descending_factor_densities",
    "renewal_laplace_u",
    "renewal_laplace_u_hat",
    "value_w",
    "value_v",
    "rogozin_overshoot_moment",
    "solve",
]

BOUNDARY_TOL = 1e-12
VALUE_RTOL = 1e-11
_BATCH_RTOL = 1e-12
_CHUNK = 64
_Y_FLOOR = 1e-300


class Regime(enum.Enum):
    CALL_FINITE = "CallFinite"
    PUT_FINITE = "PutFinite"
    INFINITE_VALUE = "InfiniteValue"
    BOUNDARY = "Boundary"

    @property
    def tag(self) -> str:
        return self.value

    @property
    def finite(self) -> bool:
        return self in (Regime.CALL_FINITE, Regime.PUT_FINITE)


def _lgamma(x: float) -> float:
    return float(log_gamma(x).real)


def _descending_rate(model: StableModel) -> float:
    return model.delta + 1.0 - model.alpha


def classify_regime(model: StableModel, gain: GainSpec) -> Regime:
    """Classify ``r`` against the window ``(-(delta + 1 - alpha), delta)``.

    Values within ``BOUNDARY_TOL`` of an endpoint are tagged ``Boundary``.

    Raises
    ------
    InadmissibleParameterError
        If ``k = 0``; the classification needs a genuine omega-clock.
    """
    if model.k == 0:
        raise InadmissibleParameterError("regime classification requires k > 0")
    r = gain.r
    if r == 0:
        raise InadmissibleParameterError("payoff exponent r must be nonzero")
    upper, lower = model.delta, -_descending_rate(model)
    if abs(r - upper) <= BOUNDARY_TOL or abs(r - lower) <= BOUNDARY_TOL:
        return Regime.BOUNDARY
    if 0 < r < upper:
        return Regime.CALL_FINITE
    if lower < r < 0:
        return Regime.PUT_FINITE
    return Regime.INFINITE_VALUE


def mgf_sup(r: float, model: StableModel) -> float:
    """``E[exp(r sup xi)] = kappa(0) / kappa(-r)`` for ``0 < r < delta``."""
    if not 0 < r < model.delta:
        raise DomainError(f"mgf_sup needs 0 < r < delta={model.delta}, got {r}")
    return kappa(0.0, model) / kappa(-r, model)


def mgf_inf(r: float, model: StableModel) -> float:
    """``E[exp(r inf xi)] = kappa_hat(0) / kappa_hat(r)`` for ``-(delta+1-alpha) < r < 0``."""
    lower = -_descending_rate(model)
    if not lower < r < 0:
        raise DomainError(f"mgf_inf needs {lower} < r < 0, got {r}")
    return kappa_hat(0.0, model) / kappa_hat(r, model)


def _mgf_factor(model: StableModel, gain: GainSpec, regime: Regime) -> float:
    if regime is Regime.CALL_FINITE:
        return mgf_sup(gain.r, model)
    if regime is Regime.PUT_FINITE:
        return mgf_inf(gain.r, model)
    raise RegimeError(f"no finite threshold in regime {regime.tag}")


def threshold_b_star(model: StableModel, gain: GainSpec) -> float:
    """Optimal threshold ``b* = (K m)^(1/|r|)`` with ``m`` the relevant mgf factor.

    In the call regime the stopping set is ``[b*, inf)``; in the put regime
    it is ``(0, 1/b*]``.

    Raises
    ------
    RegimeError
        Outside the two finite regimes.
    """
    regime = classify_regime(model, gain)
    m = _mgf_factor(model, gain, regime)
    return math.exp((math.log(gain.K) + math.log(m)) / abs(gain.r))


# ---------------------------------------------------------------- densities

def _positive(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("renewal densities are defined for finite x > 0")
    return arr


def _log1mexp(x: np.ndarray, log_x: np.ndarray) -> np.ndarray:
    """``log(1 - exp(-x))`` given ``x`` and an accurate ``log x``."""
    with np.errstate(all="ignore"):
        big = np.log(-np.expm1(-np.maximum(x, 1e-8)))
    return np.where(x < 1e-8, log_x - 0.5 * x, big)


def _lamperti_stable_log_density(x, log_x, rate: float, shape: float) -> np.ndarray:
    # density exp(-rate x) (1 - e^{-x})^(shape - 1) / Gamma(shape)
    return -rate * x + (shape - 1.0) * _log1mexp(x, log_x) - _lgamma(shape)


def ascending_factor_densities(x, model: StableModel):
    """Renewal densities ``(u1, u2)`` of the two ascending subordinator factors.

    ``u1`` has Laplace transform ``Gamma(l + alpha - delta)/Gamma(l + alpha)``
    and ``u2`` has ``Gamma(l + delta)/Gamma(l + alpha rho)``; their
    convolution is ``u``.  Requires ``delta > 0``.
    """
    x = _positive(x)
    d, a, ar = model.delta, model.alpha, model.params.alpha_rho
    if d <= 0:
        raise DomainError("factor densities need delta > 0")
    lx = np.log(x)
    u1 = np.exp(_lamperti_stable_log_density(x, lx, a - d, d))
    u2 = np.exp(_lamperti_stable_log_density(x, lx, d, ar - d))
    return u1, u2


def descending_factor_densities(x, model: StableModel):
    """Renewal densities ``(u_hat1, u_hat2)`` of the descending factors.

    Laplace transforms ``Gamma(l + 1 - delta)/Gamma(l + 1)`` and
    ``Gamma(l + delta + 1 - alpha)/Gamma(l + 1 - alpha rho)``.
    """
    x = _positive(x)
    d, arh = model.delta, model.params.alpha_rho_hat
    if d <= 0:
        raise DomainError("factor densities need delta > 0")
    lx = np.log(x)
    v1 = np.exp(_lamperti_stable_log_density(x, lx, 1.0 - d, d))
    v2 = np.exp(_lamperti_stable_log_density(x, lx, _descending_rate(model), arh - d))
    return v1, v2


def _log_u(z: np.ndarray, log_z: np.ndarray, model: StableModel) -> np.ndarray:
    """Log of the ascending renewal density, valid for very large ``z``."""
    d, ar, arh = model.delta, model.params.alpha_rho, model.params.alpha_rho_hat
    t = -np.expm1(-z)
    y = np.maximum(np.exp(-z), _Y_FLOOR)
    hyp = hyp2f1_complement(d - arh, d, ar, np.atleast_1d(t), np.atleast_1d(y))
    return -d * z + (ar - 1.0) * _log1mexp(z, log_z) + np.log(hyp) - _lgamma(ar)


def renewal_density_u(x, model: StableModel):
    """Ascending renewal density ``u``, whose Laplace transform is ``1/kappa``.

    ``u(x) = e^{-delta x} (1 - e^{-x})^{alpha rho - 1}
    2F1(delta - alpha rho_hat, delta; alpha rho; 1 - e^{-x}) / Gamma(alpha rho)``.

    Parameters
    ----------
    x : float or array_like
        Points ``x > 0``.
    model : StableModel

    Returns
    -------
    float or ndarray

    Raises
    ------
    DomainError
        If any ``x <= 0``.
    """
    arr = _positive(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.exp(_log_u(flat, np.log(flat), model)).reshape(np.shape(arr))
    return float(out) if out.ndim == 0 else out


class _DescendingKernel:
    """``u_hat(z) = exp(-beta z) J(z)`` with ``J`` a bounded convolution integral.

    ``beta = delta + 1 - alpha`` is the slower of the two factor rates, so
    ``J`` tends to a constant and ``u_hat`` can be evaluated far into the
    tail without underflow.
    """

    def __init__(self, model: StableModel):
        d, a, arh = model.delta, model.alpha, model.params.alpha_rho_hat
        self.beta = _descending_rate(model)
        self.gap = a - 2.0 * d  # difference of the two factor rates, > 0
        self.s1, self.s2 = d, arh - d
        self.single = d == 0.0
        if self.single:
            self.log_norm = -_lgamma(arh)
            self.j_inf = math.exp(self.log_norm)
        else:
            self.log_norm = -_lgamma(self.s1) - _lgamma(self.s2)
            self.j_inf = float(gamma_ratio((self.gap,), (a - d, arh - d)))
        self.z_flat = 40.0 / min(self.gap, 1.0) if self.gap > 0 else math.inf

    def j(self, z: np.ndarray, log_z: np.ndarray) -> np.ndarray:
        z = np.atleast_1d(z).astype(float)
        log_z = np.atleast_1d(log_z).astype(float)
        if self.single:
            return np.exp((self.s2 - 1.0) * _log1mexp(z, log_z) + self.log_norm)
        out = np.full(z.shape, self.j_inf)
        near = z < self.z_flat
        idx = np.flatnonzero(near)
        for start in range(0, len(idx), _CHUNK):
            sel = idx[start:start + _CHUNK]
            out[sel] = self._convolve(z[sel], log_z[sel])
        return out

    def _convolve(self, z: np.ndarray, log_z: np.ndarray) -> np.ndarray:
        zc, lzc = z[:, None], log_z[:, None]
        gap, s1, s2 = self.gap, self.s1, self.s2

        def integrand(v, cv):
            lv, lcv = np.log(v)[None, :], np.log(cv)[None, :]
            left, right = zc * v[None, :], zc * cv[None, :]
            # the power z^(s1 + s2 - 2) is taken out to keep tiny z finite
            expo = (-gap * left + (s1 - 1.0) * (_log1mexp(left, lzc + lv) - lzc)
                    + (s2 - 1.0) * (_log1mexp(right, lzc + lcv) - lzc))
            return np.exp(expo)

        values, _ = integrate_unit_batch(integrand, _BATCH_RTOL)
        return values * np.exp((s1 + s2 - 1.0) * log_z + self.log_norm)

    def log_density(self, z: np.ndarray, log_z: np.ndarray) -> np.ndarray:
        return -self.beta * z + np.log(self.j(z, log_z))


_KERNELS: dict = {}
_KERNEL_LOCK = threading.Lock()


def _kernel(model: StableModel) -> _DescendingKernel:
    key = (model.alpha, model.rho, model.k)
    with _KERNEL_LOCK:
        ker = _KERNELS.get(key)
        if ker is None:
            ker = _KERNELS[key] = _DescendingKernel(model)
    return ker


def renewal_density_u_hat(x, model: StableModel):
    """Descending renewal density ``u_hat``, with Laplace transform ``1/kappa_hat``.

    Computed as the numerical convolution of the two descending factor
    densities.  For ``delta = 0`` the first factor is a unit mass at the
    origin and ``u_hat`` is the second factor alone.

    Raises
    ------
    DomainError
        If any ``x <= 0``.
    """
    arr = _positive(x)
    flat = np.atleast_1d(arr).ravel()
    ker = _kernel(model)
    out = np.exp(ker.log_density(flat, np.log(flat))).reshape(np.shape(arr))
    return float(out) if out.ndim == 0 else out


def renewal_laplace_u(lam: float, model: StableModel, rtol: float = 1e-12) -> float:
    """``int_0^inf exp(-lam x) u(x) dx`` by quadrature (should equal ``1/kappa(lam)``)."""
    if lam < 0:
        raise DomainError("Laplace argument must be >= 0")

    def f(z, off):
        return np.exp(-lam * z + _log_u(z, np.log(off), model))

    return integrate_semi_infinite(f, 0.0, 0.0, with_offset=True, rtol=rtol).value


def renewal_laplace_u_hat(lam: float, model: StableModel, rtol: float = 1e-12) -> float:
    """``int_0^inf exp(-lam x) u_hat(x) dx`` by quadrature (should equal ``1/kappa_hat(lam)``)."""
    if lam < 0:
        raise DomainError("Laplace argument must be >= 0")
    ker = _kernel(model)

    def f(z, off):
        return np.exp(-lam * z + ker.log_density(z, np.log(off)))

    return integrate_semi_infinite(f, 0.0, 0.0, with_offset=True, rtol=rtol).value


# ------------------------------------------------------------ value functions

def _require_finite(model: StableModel, gain: GainSpec) -> Regime:
    regime = classify_regime(model, gain)
    if regime is Regime.BOUNDARY:
        raise RegimeError(
            f"r={gain.r} sits on the regime boundary; no value is produced there"
        )
    if not regime.finite:
        raise RegimeError(f"value is infinite in regime {regime.tag}")
    return regime


def _excess_weight(log_km: float, rate: float, dz: np.ndarray) -> np.ndarray:
    """Log of ``K m (exp(rate dz) - 1)``, stable for tiny and huge ``dz``."""
    with np.errstate(over="ignore", divide="ignore"):
        small = np.log(np.expm1(rate * np.minimum(dz, 30.0 / rate)))
    large = rate * dz + np.log1p(-np.exp(-rate * np.maximum(dz, 30.0 / rate)))
    return log_km + np.where(rate * dz < 30.0, small, large)


def value_w(
    y: float,
    model: StableModel,
    gain: GainSpec,
    *,
    rtol: float = VALUE_RTOL,
    force_quadrature: bool = False,
) -> float:
    """Lamperti-level value ``w(y)`` of the stopping problem.

    Call side: ``w(y) = kappa(-r) int (e^{r(y+z)} - K m)^+ u(z) dz``.
    Put side: ``w(y) = kappa_hat(r) int (e^{r(y-z)} - K m_hat)^+ u_hat(z) dz``.

    In the stopping region the integral reduces to ``e^{ry} - K`` and that
    closed value is returned, unless ``force_quadrature`` asks for the
    integral anyway (used to check the reduction).

    Raises
    ------
    RegimeError
        Outside the finite regimes.
    """
    regime = _require_finite(model, gain)
    r, K = gain.r, gain.K
    m = _mgf_factor(model, gain, regime)
    log_km = math.log(K) + math.log(m)
    log_b = log_km / abs(r)
    if regime is Regime.CALL_FINITE:
        z0 = log_b - y
        prefactor = kappa(-r, model)
        log_density = lambda z, lz: _log_u(z, lz, model)  # noqa: E731
    else:
        z0 = y + log_b
        prefactor = kappa_hat(r, model)
        ker = _kernel(model)
        log_density = ker.log_density
    if z0 <= 0 and not force_quadrature:
        return math.exp(r * y) - K
    lower = max(z0, 0.0)
    rate = abs(r)

    def f(z, off):
        dz = off + (lower - z0)
        log_z = np.log(off) if lower == 0.0 else np.log(z)
        return np.exp(_excess_weight(log_km, rate, dz) + log_density(z, log_z))

    res = integrate_semi_infinite(f, lower, 0.0, with_offset=True, rtol=rtol)
    return prefactor * res.value


class _ContinuationCache:
    """Monotone interpolant of ``w`` on the continuation region.

    Stored as ``log w(y) - slope * y`` against the log-distance from the
    boundary, where ``slope`` is the exact exponential rate of ``w`` deep in
    the continuation region; that remainder flattens out, so extrapolation
    beyond the grid is by a constant.
    """

    def __init__(self, model: StableModel, gain: GainSpec, regime: Regime,
                 log_b: float, n: int = 161):
        self.call = regime is Regime.CALL_FINITE
        self.edge = log_b if self.call else -log_b
        if self.call:
            self.slope = model.delta
            decay = 1.0
        else:
            self.slope = -_descending_rate(model)
            decay = min(model.alpha - 2.0 * model.delta, 1.0)
        span = min(40.0 / max(decay, 1e-3), 400.0)
        d = span * np.linspace(0.0, 1.0, n) ** 3
        ys = self.edge - d if self.call else self.edge + d
        w = np.array([value_w(float(yy), model, gain) for yy in ys[1:]])
        w0 = math.exp(gain.r * self.edge) - gain.K
        logw = np.log(np.concatenate(([w0], w))) - self.slope * ys
        self.span = span
        self.interp = PchipInterpolator(d, logw, extrapolate=False)
        self.tail = float(logw[-1])

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        d = self.edge - y if self.call else y - self.edge
        inner = np.clip(d, 0.0, self.span)
        g = np.where(d >= self.span, self.tail, self.interp(inner))
        return np.exp(g + self.slope * y)


@dataclass
class StoppingSolution:
    """Regime, threshold and value evaluator for one (model, gain) pair.

    ``value_at(x)`` gives ``v(x)`` on the whole line.  The interpolation
    grid used for ``x < 0`` is built on first use under a lock and is
    read-only afterwards.
    """

    model: StableModel
    gain: GainSpec
    regime: Regime
    b_star: float | None
    mgf_factor: float | None
    rtol: float = VALUE_RTOL
    _cache: _ContinuationCache | None = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def stopping_set(self) -> tuple[float, float] | None:
        if self.regime is Regime.CALL_FINITE:
            return (self.b_star, math.inf)
        if self.regime is Regime.PUT_FINITE:
            return (0.0, 1.0 / self.b_star)
        return None

    def in_stopping_set(self, x: float) -> bool:
        s = self.stopping_set
        if s is None or x <= 0:
            return False
        if self.regime is Regime.CALL_FINITE:
            return x >= s[0]
        return x <= s[1]

    def continuation_cache(self) -> _ContinuationCache:
        with self._lock:
            if self._cache is None:
                self._cache = _ContinuationCache(
                    self.model, self.gain, self.regime, math.log(self.b_star))
            return self._cache

    def value_at(self, x: float) -> float:
        if self.regime is Regime.BOUNDARY:
            raise RegimeError("Boundary regime: the value is not determined")
        x = float(x)
        if not math.isfinite(x):
            raise DomainError("x must be finite")
        if x == 0.0:
            return 0.0
        if self.regime is Regime.INFINITE_VALUE:
            return math.inf
        if x > 0:
            return value_w(math.log(x), self.model, self.gain, rtol=self.rtol)
        return self._negative_value(x)

    __call__ = value_at

    def _positive_part(self, y: np.ndarray) -> np.ndarray:
        """``v`` on ``(0, inf)`` for arrays, through the cached interpolant."""
        r, K = self.gain.r, self.gain.K
        logy = np.log(y)
        stop = (y >= self.b_star) if self.regime is Regime.CALL_FINITE else (y <= 1.0 / self.b_star)
        out = np.empty_like(y)
        out[stop] = np.exp(r * logy[stop]) - K
        if np.any(~stop):
            out[~stop] = self.continuation_cache()(logy[~stop])
        return out

    def _negative_value(self, x: float) -> float:
        m = self.model
        ar = m.params.alpha_rho
        scale = -x
        weight = (1.0 - m.p) * math.sin(math.pi * ar) / math.pi
        r, K = self.gain.r, self.gain.K
        tol = 0.0
        if self.regime is Regime.CALL_FINITE:
            s_b = self.b_star / scale

            def cont(s, da, db):
                return self._positive_part(scale * s) * s ** -ar / (1.0 + s)

            def stop(s, off):
                excess = np.expm1(r * np.log1p(off / s_b)) * (self.b_star ** r) \
                    + (self.b_star ** r - K)
                return excess * s ** -ar / (1.0 + s)

            near = integrate_interval(cont, 0.0, s_b, tol, with_offsets=True, rtol=self.rtol)
            far = integrate_semi_infinite(stop, s_b, tol, with_offset=True, rtol=self.rtol)
        else:
            s_b = 1.0 / (self.b_star * scale)

            def stop(s, da, db):
                return (np.exp(r * np.log(scale * da)) - K) * da ** -ar / (1.0 + da)

            def cont(s, off):
                return self._positive_part(scale * s) * s ** -ar / (1.0 + s)

            near = integrate_interval(stop, 0.0, s_b, tol, with_offsets=True, rtol=self.rtol)
            far = integrate_semi_infinite(cont, s_b, tol, with_offset=True, rtol=self.rtol)
        return weight * (near.value + far.value)


def solve(model: StableModel, gain: GainSpec, *, rtol: float = VALUE_RTOL) -> StoppingSolution:
    """Classify the regime and assemble the solution object."""
    regime = classify_regime(model, gain)
    if regime.finite:
        m = _mgf_factor(model, gain, regime)
        b = threshold_b_star(model, gain)
    else:
        m = b = None
    return StoppingSolution(model, gain, regime, b, m, rtol)


def value_v(x: float, model: StableModel, gain: GainSpec) -> float:
    """Value ``v(x)`` of the original problem; ``+inf`` in the infinite regime.

    ``v(0) = 0``; for ``x > 0`` it is ``w(log x)``; for ``x < 0`` it averages
    ``v`` over the overshoot law at the first passage above zero, weighted
    by the survival probability ``1 - p`` of the excursion.

    Raises
    ------
    RegimeError
        On the regime boundary.
    """
    return solve(model, gain).value_at(x)


def rogozin_overshoot_moment(x: float, r: float, model: StableModel,
                             rtol: float = 1e-13) -> float:
    """``E_x[X^r]`` at the first passage above zero from ``x < 0``.

    The overshoot has density
    ``(sin(pi a rho)/pi) (-x)^{a rho} y^{-a rho} / (y - x)`` on ``y > 0``;
    the moment is computed by quadrature after the scaling ``y = -x s``.

    Raises
    ------
    DomainError
        If ``x >= 0`` or ``r`` is outside ``(alpha rho - 1, alpha rho)``.
    """
    if not x < 0:
        raise DomainError("overshoot moments need a start x < 0")
    ar = model.params.alpha_rho
    if not ar - 1.0 < r < ar:
        raise DomainError(f"moment of order {r} diverges; need {ar - 1} < r < {ar}")

    # int_0^1 s^{c-1} / (1 + s) ds = (1/c) int_0^1 dv / (1 + v^{1/c}) after s = v^{1/c},
    # which removes the endpoint singularity however close c is to zero
    def piece(c: float) -> float:
        res = integrate_interval(lambda v: 1.0 / (1.0 + v ** (1.0 / c)), 0.0, 1.0, 0.0, rtol=rtol)
        return res.value / c

    total = piece(1.0 + r - ar) + piece(ar - r)
    return math.sin(math.pi * ar) / math.pi * (-x) ** r * total
