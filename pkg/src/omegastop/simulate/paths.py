"""Monte Carlo estimators built on the compiled path kernels."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from ..errors import InadmissibleParameterError
from ..model import GainSpec, StableModel
from . import kernels as K_
from .rng import split_seed
from .stable import cms_constants

__all__ = [
    "PathConfig",
    "PathSample",
    "PathEnsembleReport",
    "simulate_omega_killed_path",
    "censor_path",
    "estimate_killing_probability",
    "estimate_policy_value",
    "estimate_sup_moment",
    "estimate_fixed_time_values",
    "simulate_frozen_kill_times",
    "dump_paths_csv",
    "resolve_threads",
]

STEPPING_MODES = ("scaled", "fixed")
DIRECTIONS = ("up-cross", "down-entry")
KILLING_MODES = ("clock", "gluing")


@dataclass(frozen=True)
class PathConfig:
    """Discretisation and sampling settings.

    Parameters
    ----------
    dt : float
        Time step.  With ``stepping="fixed"`` every step has length ``dt``;
        with ``stepping="scaled"`` a step from ``x`` has length
        ``dt * max(|x|, zero_band)^alpha``, a constant step in the
        self-similar time scale, so the per-step killing hazard is about
        ``k dt`` at every level.
    horizon : float
        Largest simulated time; may be ``inf`` when ``max_steps`` bounds
        the work instead.
    n_paths : int
    seed : int
        64-bit key of the counter-based generator.
    zero_band : float, optional
        Width ``eps`` of the band ``(-eps, 0)`` that triggers a forced kill
        and caps the killing rate.  Defaults to ``dt^(1/alpha)/10`` for
        fixed steps and ``1e-10 * max(|x0|, 1)`` for scaled steps.
    stepping : {"scaled", "fixed"}
    max_steps : int
        Per-path step budget; paths still alive are censored.
    threads : int
        Worker threads; 0 means the ``OMEGASTOP_THREADS`` environment
        variable or all cores.  Results do not depend on it.
    killing : {"clock", "gluing"}
        ``"clock"`` kills at rate ``omega(X_t)`` along the path.
        ``"gluing"`` is a diagnostic: each negative excursion is killed at
        its start with probability ``p``, independently of its path, and
        the clock is otherwise ignored.  The two agree on ``p`` but not on
        the law of where surviving excursions return.
    """

    dt: float = 1e-3
    horizon: float = 200.0
    n_paths: int = 10_000
    seed: int = 0
    zero_band: float | None = None
    stepping: str = "scaled"
    max_steps: int = 1_000_000
    threads: int = 0
    killing: str = "clock"

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InadmissibleParameterError("dt must be finite and positive")
        if not self.horizon > 0 or math.isnan(self.horizon):
            raise InadmissibleParameterError("horizon must be positive")
        if self.dt > self.horizon:
            raise InadmissibleParameterError("dt must not exceed the horizon")
        if int(self.n_paths) < 1:
            raise InadmissibleParameterError("n_paths must be at least 1")
        split_seed(self.seed)
        if self.zero_band is not None and not self.zero_band > 0:
            raise InadmissibleParameterError("zero_band must be positive")
        if self.stepping not in STEPPING_MODES:
            raise InadmissibleParameterError(f"stepping must be one of {STEPPING_MODES}")
        if int(self.max_steps) < 1:
            raise InadmissibleParameterError("max_steps must be positive")
        if int(self.threads) < 0:
            raise InadmissibleParameterError("threads must be >= 0")
        if self.killing not in KILLING_MODES:
            raise InadmissibleParameterError(f"killing must be one of {KILLING_MODES}")

    def band(self, alpha: float, x0: float = 1.0) -> float:
        if self.zero_band is not None:
            return self.zero_band
        if self.stepping == "fixed":
            return self.dt ** (1.0 / alpha) / 10.0
        return 1e-10 * max(abs(x0), 1.0)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PathSample:
    """One discretised trajectory with its clock ``A``."""

    times: np.ndarray
    states: np.ndarray
    clock_value: np.ndarray
    killed: bool
    kill_time: float | None

    @property
    def alive(self) -> np.ndarray:
        out = np.ones(len(self.times), dtype=bool)
        if self.killed:
            out[-1] = False
        return out


@dataclass(frozen=True)
class PathEnsembleReport:
    """Monte Carlo estimate with its standard error and censoring record.

    ``std_error`` is the sample standard deviation over the ``n_effective``
    contributing paths divided by ``sqrt(n_effective)``.
    """

    estimate: float
    std_error: float
    n_effective: int
    config: PathConfig
    bias_notes: str
    n_killed: int = 0
    n_censored: int = 0
    censored_positions: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    mean_steps: float = 0.0

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.config.n_paths

    def z_score(self, reference: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.estimate == reference else math.copysign(math.inf, self.estimate - reference)
        return (self.estimate - reference) / self.std_error

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n_effective": self.n_effective,
            "n_killed": self.n_killed,
            "n_censored": self.n_censored,
            "censored_fraction": self.censored_fraction,
            "mean_steps": self.mean_steps,
            "bias_notes": self.bias_notes,
            "config": self.config.as_dict(),
        }


def resolve_threads(requested: int = 0) -> int:
    """Thread count from the argument, then ``OMEGASTOP_THREADS``, then all cores."""
    n = int(requested)
    if n <= 0:
        env = os.environ.get("OMEGASTOP_THREADS", "").strip()
        n = int(env) if env.isdigit() and int(env) > 0 else numba.config.NUMBA_NUM_THREADS
    return max(1, min(n, numba.config.NUMBA_NUM_THREADS))


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def _run(config: PathConfig, model: StableModel, mode: int, x0: float, *, r=1.0, K=1.0,
         threshold=0.0, checkpoints=None):
    B, S, sigma = cms_constants(model.params)
    k0, k1 = split_seed(config.seed)
    n = int(config.n_paths)
    cps = np.asarray([] if checkpoints is None else checkpoints, dtype=float)
    if mode == K_.MODE_FIXED_TIMES and len(cps) == 0:
        cps = np.array([0.0])
    value = np.zeros(n)
    status = np.zeros(n, dtype=np.int8)
    end_x = np.zeros(n)
    n_steps = np.zeros(n, dtype=np.int64)
    end_t = np.zeros(n)
    cp_values = np.zeros((n, max(len(cps), 1)))
    numba.set_num_threads(resolve_threads(config.threads))
    K_.run_paths(mode, n, float(x0), float(config.dt), float(config.horizon),
                 int(config.max_steps), config.stepping == "scaled",
                 float(config.band(model.alpha, x0)), model.alpha, B, S, sigma,
                 model.k, model.p if config.killing == "gluing" else -1.0,
                 float(r), float(K), float(threshold), cps, k0, k1,
                 value, status, end_x, n_steps, end_t, cp_values)
    return value, status, end_x, n_steps, end_t, cp_values


def _censor_note(n_censored: int, n: int, what: str) -> str:
    if n_censored == 0:
        return "no path reached the horizon or step budget"
    return (f"{n_censored} of {n} paths ({n_censored / n:.3%}) were censored at the "
            f"horizon or step budget; {what}")


def estimate_killing_probability(config: PathConfig, model: StableModel) -> PathEnsembleReport:
    """Fraction of first negative excursions that end in killing, from ``x0 = 1``.

    By self-similarity the outcome of an excursion does not depend on where
    it starts, so paths censored before their excursion begins are dropped
    without bias.
    """
    if not model.k > 0:
        raise InadmissibleParameterError("estimating p requires k > 0")
    value, status, end_x, n_steps, _, _ = _run(config, model, K_.MODE_FIRST_EXCURSION, 1.0)
    done = status != K_.STATUS_CENSORED
    mean, se = _mean_and_se(value[done])
    censored = ~done
    in_excursion = int(np.sum(censored & (end_x < 0)))
    note = _censor_note(int(censored.sum()), len(value),
                        f"they are excluded; {in_excursion} were inside their excursion")
    return PathEnsembleReport(mean, se, int(done.sum()), config, note,
                              int(np.sum(status == K_.STATUS_KILLED)), int(censored.sum()),
                              end_x[censored], float(np.mean(n_steps)))


def estimate_policy_value(config: PathConfig, model: StableModel, gain: GainSpec,
                          threshold: float, direction: str = "up-cross",
                          x0: float = 1.0) -> PathEnsembleReport:
    """Value of a threshold policy: mean of ``g(X_tau) 1{tau < T}`` from ``x0``.

    ``direction="up-cross"`` stops at the first time ``X >= threshold``;
    ``"down-entry"`` stops on the first visit to ``(0, threshold]``.  Killed
    and censored paths contribute zero; censoring biases the estimate
    downwards and the censored end positions are returned so the caller
    can bound that bias.
    """
    if direction not in DIRECTIONS:
        raise InadmissibleParameterError(f"direction must be one of {DIRECTIONS}")
    if not threshold > 0:
        raise InadmissibleParameterError("threshold must be positive")
    mode = K_.MODE_UP_CROSS if direction == "up-cross" else K_.MODE_DOWN_ENTRY
    value, status, end_x, n_steps, _, _ = _run(config, model, mode, x0, r=gain.r, K=gain.K,
                                               threshold=threshold)
    mean, se = _mean_and_se(value)
    censored = status == K_.STATUS_CENSORED
    note = _censor_note(int(censored.sum()), len(value),
                        "they score zero, so the estimate is biased low")
    return PathEnsembleReport(mean, se, len(value), config, note,
                              int(np.sum(status == K_.STATUS_KILLED)), int(censored.sum()),
                              end_x[censored], float(np.mean(n_steps)))


def estimate_sup_moment(config: PathConfig, model: StableModel, r: float,
                        x0: float = 1.0) -> PathEnsembleReport:
    """Mean of ``(sup of the positive part of X over its lifetime)^r`` from ``x0``."""
    if not r > 0:
        raise InadmissibleParameterError("sup moment needs r > 0")
    value, status, end_x, n_steps, _, _ = _run(config, model, K_.MODE_SUP, x0, r=r)
    mean, se = _mean_and_se(value)
    censored = status == K_.STATUS_CENSORED
    note = _censor_note(int(censored.sum()), len(value),
                        "their running supremum is used, biasing the estimate low")
    return PathEnsembleReport(mean, se, len(value), config, note,
                              int(np.sum(status == K_.STATUS_KILLED)), int(censored.sum()),
                              end_x[censored], float(np.mean(n_steps)))


def estimate_fixed_time_values(config: PathConfig, model: StableModel, gain: GainSpec,
                               times, x0: float = 1.0) -> list[PathEnsembleReport]:
    """``E[g(X_t) 1{t < T}]`` at each deterministic ``t``, all from the same paths.

    Sharing the paths across times (common random numbers) makes the
    differences between horizons much less noisy than independent runs.
    """
    cps = np.sort(np.asarray(times, dtype=float))
    if len(cps) == 0 or np.any(cps < 0) or not np.all(np.isfinite(cps)):
        raise InadmissibleParameterError("times must be finite and nonnegative")
    if cps[-1] > config.horizon:
        raise InadmissibleParameterError("every time must lie within the horizon")
    _, status, _, n_steps, _, cp_values = _run(config, model, K_.MODE_FIXED_TIMES, x0,
                                               r=gain.r, K=gain.K, checkpoints=cps)
    censored = status == K_.STATUS_CENSORED
    reports = []
    for j in range(len(cps)):
        mean, se = _mean_and_se(cp_values[:, j])
        note = _censor_note(int(censored.sum()), len(status),
                            "step budget exhausted before the last time point")
        reports.append(PathEnsembleReport(mean, se, len(status), config,
                                          f"t={cps[j]:g}: " + note,
                                          int(np.sum(status == K_.STATUS_KILLED)),
                                          int(censored.sum()), np.empty(0),
                                          float(np.mean(n_steps))))
    return reports


def simulate_omega_killed_path(config: PathConfig, model: StableModel, x0: float,
                               path_id: int = 0) -> PathSample:
    """Record one trajectory (stream ``path_id`` of ``config.seed``)."""
    if not math.isfinite(x0):
        raise InadmissibleParameterError("x0 must be finite")
    B, S, sigma = cms_constants(model.params)
    k0, k1 = split_seed(config.seed)
    t, x, a, killed = K_.record_path(int(path_id), float(x0), float(config.dt),
                                     float(config.horizon), int(config.max_steps),
                                     config.stepping == "scaled",
                                     float(config.band(model.alpha, x0)), model.alpha,
                                     B, S, sigma, model.k, k0, k1)
    return PathSample(t, x, a, bool(killed), float(t[-1]) if killed else None)


def censor_path(sample: PathSample) -> tuple[np.ndarray, np.ndarray]:
    """Glue the positive sections of a trajectory into the censored process ``Y``.

    Steps with ``X < 0`` are erased and the clock of ``Y`` advances only
    over steps that end in ``[0, inf)``.  Returns ``(times, states)``.
    """
    x = sample.states
    keep = x >= 0
    dt = np.diff(sample.times, prepend=0.0)
    times = np.cumsum(np.where(keep, dt, 0.0))[keep]
    return times, x[keep]


def simulate_frozen_kill_times(model: StableModel, x: float, dt: float, n: int,
                               seed: int = 0, zero_band: float | None = None,
                               max_steps: int = 10_000_000) -> np.ndarray:
    """Kill times of a state held at ``x`` under the per-step killing rule.

    With ``x < 0`` fixed the clock grows linearly, so the kill time should
    be exponential with rate ``omega(x)``.
    """
    k0, k1 = split_seed(seed)
    eps = dt ** (1.0 / model.alpha) / 10.0 if zero_band is None else zero_band
    out = np.empty(int(n))
    K_.frozen_kill_times(int(n), float(x), float(dt), model.k, model.alpha, eps,
                         k0, k1, int(max_steps), out)
    return out


def dump_paths_csv(path: str, config: PathConfig, model: StableModel, x0: float,
                   n_paths: int | None = None) -> int:
    """Write trajectories as CSV rows ``path_id,t,x,a,alive``; returns rows written."""
    n = config.n_paths if n_paths is None else int(n_paths)
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path_id", "t", "x", "a", "alive"])
        for pid in range(n):
            s = simulate_omega_killed_path(config, model, x0, pid)
            alive = s.alive
            for j in range(len(s.times)):
                writer.writerow([pid, repr(float(s.times[j])), repr(float(s.states[j])),
                                 repr(float(s.clock_value[j])), int(alive[j])])
                rows += 1
    return rows
