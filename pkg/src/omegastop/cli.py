"""Command-line front end: ``omegastop {model,solve,simulate}``.

Every command prints one JSON object on stdout with the keys ``command``,
``model``, ``result``, ``diagnostics``, ``version`` and ``wall_ms``.  Floats
carry 17 significant digits; an infinite value is written as the string
``"infinite"``.  Exit status is 0 on success, 2 for user errors
(inadmissible parameters, the Boundary regime, bad flag combinations) and
3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time

from . import __version__
from .errors import ConvergenceError, DomainError, InadmissibleParameterError, NumericError, RegimeError
from .model import GainSpec, StableModel, make_model
from .stopping import Regime, mgf_sup, solve
from .simulate import (
    PathConfig,
    dump_paths_csv,
    estimate_killing_probability,
    estimate_policy_value,
    estimate_sup_moment,
)

log = logging.getLogger("omegastop")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
SIM_MODES = ("p", "policy", "value", "supmoment")


class UsageError(Exception):
    """Flag combination that parses but makes no sense."""


def encode(obj) -> str:
    """JSON text with floats at 17 significant digits and infinities as ``"infinite"``."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isinf(obj):
            return json.dumps("infinite" if obj > 0 else "-infinite")
        if math.isnan(obj):
            raise NumericError("refusing to serialise NaN")
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(encode(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return encode(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _float_or_inf(text: str) -> float:
    if text.strip().lower() in ("inf", "infinite", "infinity"):
        return math.inf
    return float(text)


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, required=True, help="stability index in (0, 2)")
    p.add_argument("--rho", type=float, required=True, help="positivity parameter")
    p.add_argument("--k", type=float, required=True, help="omega-clock coefficient, >= 0")


def _gain_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--r", type=float, required=required, help="payoff exponent, nonzero")
    p.add_argument("--strike", type=float, default=1.0, help="strike K > 0 (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omegastop",
        description="Optimal stopping for stable processes killed by an omega-clock.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("model", help="derived constants of a model")
    _model_flags(pm)

    ps = sub.add_parser("solve", help="regime, threshold and value function")
    _model_flags(ps)
    _gain_flags(ps)
    ps.add_argument("--x", type=float, nargs="*", default=[], help="points at which to report v(x)")

    pq = sub.add_parser("simulate", help="Monte Carlo estimates with closed-form comparators")
    _model_flags(pq)
    _gain_flags(pq, required=False)
    pq.add_argument("--mode", required=True, help="one of: " + ", ".join(SIM_MODES))
    pq.add_argument("--n", type=int, default=10_000, help="number of paths")
    pq.add_argument("--dt", type=float, default=1e-3, help="time step")
    pq.add_argument("--horizon", type=_float_or_inf, default=200.0, help="time horizon ('inf' allowed)")
    pq.add_argument("--seed", type=int, default=0, help="64-bit generator key")
    pq.add_argument("--threshold", type=float, default=None, help="policy threshold")
    pq.add_argument("--direction", choices=("up-cross", "down-entry"), default=None)
    pq.add_argument("--x0", type=float, default=1.0, help="starting point (policy/value)")
    pq.add_argument("--stepping", choices=("scaled", "fixed"), default="scaled")
    pq.add_argument("--max-steps", type=int, default=1_000_000)
    pq.add_argument("--zero-band", type=float, default=None)
    pq.add_argument("--killing", choices=("clock", "gluing"), default="clock",
                    help="clock: rate omega(X_t); gluing: diagnostic Bernoulli(p) per excursion")
    pq.add_argument("--threads", type=int, default=0, help="0 = OMEGASTOP_THREADS or all cores")
    pq.add_argument("--dump", default=None, help="write trajectories to this CSV file")
    pq.add_argument("--dump-paths", type=int, default=100, help="paths to dump (default 100)")
    return parser


def _make_model(args) -> StableModel:
    return make_model(args.alpha, args.rho, args.k)


def cmd_model(args) -> tuple[dict, dict, StableModel]:
    model = _make_model(args)
    result = {"regime_window": {"call_upper": model.delta,
                                "put_lower": -(model.delta + 1.0 - model.alpha)}}
    diagnostics = {"identity_residual": model.identity_residual}
    return result, diagnostics, model


def cmd_solve(args) -> tuple[dict, dict, StableModel]:
    model = _make_model(args)
    gain = GainSpec(args.r, args.strike)
    sol = solve(model, gain)
    if sol.regime is Regime.BOUNDARY:
        raise RegimeError(
            f"r={args.r} lies on the regime boundary (delta={model.delta}, "
            f"-(delta+1-alpha)={-(model.delta + 1.0 - model.alpha)}); the theory gives no value there"
        )
    values = [{"x": x, "v": sol.value_at(x)} for x in args.x]
    result = {
        "regime": sol.regime.tag,
        "b_star": sol.b_star if sol.b_star is not None else math.inf,
        "mgf_factor": sol.mgf_factor if sol.mgf_factor is not None else math.inf,
        "values": values,
    }
    if sol.regime is Regime.CALL_FINITE:
        result["stopping_set"] = {"lower": sol.b_star, "upper": math.inf}
    elif sol.regime is Regime.PUT_FINITE:
        result["stopping_set"] = {"lower": 0.0, "upper": 1.0 / sol.b_star}
    return result, {"identity_residual": model.identity_residual}, model


def _sim_result(report, comparator: float | None) -> dict:
    out = report.as_dict()
    out.pop("config")
    if comparator is not None:
        out["comparator"] = comparator
        out["z_score"] = report.z_score(comparator) if math.isfinite(comparator) else math.inf
    return out


def cmd_simulate(args) -> tuple[dict, dict, StableModel]:
    if args.mode not in SIM_MODES:
        raise UsageError(f"--mode must be one of {', '.join(SIM_MODES)}, got {args.mode!r}")
    model = _make_model(args)
    config = PathConfig(dt=args.dt, horizon=args.horizon, n_paths=args.n, seed=args.seed,
                        zero_band=args.zero_band, stepping=args.stepping,
                        max_steps=args.max_steps, threads=args.threads,
                        killing=args.killing)
    needs_gain = args.mode in ("policy", "value", "supmoment")
    if needs_gain and args.r is None:
        raise UsageError(f"--mode {args.mode} needs --r")
    if args.mode != "policy" and (args.threshold is not None or args.direction is not None):
        raise UsageError("--threshold/--direction apply only to --mode policy")
    x0 = 1.0
    extra = {}
    if args.mode == "p":
        report = estimate_killing_probability(config, model)
        comparator = model.p
    elif args.mode == "supmoment":
        report = estimate_sup_moment(config, model, args.r)
        comparator = mgf_sup(args.r, model)
    else:
        gain = GainSpec(args.r, args.strike)
        sol = solve(model, gain)
        if not sol.regime.finite and args.mode == "value":
            raise UsageError(f"--mode value needs a finite regime, got {sol.regime.tag}")
        if sol.regime is Regime.BOUNDARY:
            raise RegimeError("Boundary regime: no optimal policy to simulate")
        x0 = args.x0
        if args.mode == "value":
            threshold = sol.b_star if sol.regime is Regime.CALL_FINITE else 1.0 / sol.b_star
            direction = "up-cross" if sol.regime is Regime.CALL_FINITE else "down-entry"
        else:
            if args.threshold is None:
                raise UsageError("--mode policy needs --threshold")
            threshold = args.threshold
            direction = args.direction or ("up-cross" if args.r > 0 else "down-entry")
        report = estimate_policy_value(config, model, gain, threshold, direction, x0)
        comparator = sol.value_at(x0)
        extra = {"threshold": threshold, "direction": direction, "x0": x0,
                 "regime": sol.regime.tag}
    if args.dump:
        rows = dump_paths_csv(args.dump, config, model, x0, min(args.dump_paths, args.n))
        extra["dump"] = {"path": args.dump, "rows": rows}
    result = _sim_result(report, comparator)
    result.update(extra)
    diagnostics = {"config": config.as_dict(), "identity_residual": model.identity_residual}
    return result, diagnostics, model


COMMANDS = {"model": cmd_model, "solve": cmd_solve, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    echo = {k: v for k, v in vars(args).items() if k != "verbose"}
    try:
        result, diagnostics, model = COMMANDS[args.command](args)
    except (InadmissibleParameterError, RegimeError, DomainError, UsageError, ValueError) as exc:
        print(f"omegastop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, ConvergenceError, ArithmeticError) as exc:
        print(f"omegastop: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report = {
        "command": echo,
        "model": model.as_dict(),
        "result": result,
        "diagnostics": diagnostics,
        "version": __version__,
        "wall_ms": (time.perf_counter() - start) * 1e3,
    }
    sys.stdout.write(encode(report) + "\n")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
