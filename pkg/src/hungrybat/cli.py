"""Command-line interface.

Subcommands: ``validate``, ``solve``, ``core``, ``simulate``, ``sweep``,
``tightness``.  Reports go to stdout or ``--output`` as JSON or CSV; CSV
floats carry 17 significant digits so reruns diff byte-for-byte.  The
optional ``--plot`` flag renders a PNG figure next to the report.

Exit codes: 0 success; 1 internal inconsistency (a result violated its
own certificate); 2 argument, file, or validation error; 3 core guarantee
violated (signals a bug: the bound holds for every valid instance).

All randomness flows from ``--seed`` (default 0); nothing reads the
clock, so identical flags give identical bytes, including with parallel
replications (``--workers``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .core import build_core
from .errors import (
    ConsistencyError,
    DomainError,
    HungryBatError,
    InstanceValidationError,
    LengthMismatchError,
)
from .instance import Instance, instance_from_json, order_by_chi
from .payoff import Strategy, b, chi
from .simulator import simulate
from .solver import solve_optimal
from .core import tightness_instance

__all__ = ["main", "entry_point"]

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_GUARANTEE = 3

# Strategy files may be off unity by up to this much; smaller deviations
# (above the Strategy constructor's own 1e-12) are renormalized silently.
_STRATEGY_SUM_TOL = 1e-9


class CliError(Exception):
    """User-facing failure with an exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _bool(x: bool) -> str:
    return "true" if x else "false"


def _load_instance(path: str | None) -> Instance:
    if path is None:
        raise CliError(EXIT_USAGE, "an --instance file is required")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot read instance file {path}: {exc}") from exc
    return instance_from_json(text)


def _load_strategy(path: str, inst: Instance) -> Strategy:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot read strategy file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_USAGE, f"strategy file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "p" not in raw or not isinstance(raw["p"], list):
        raise CliError(EXIT_USAGE, f'strategy file {path} must be an object {{"p": [..]}}')
    try:
        probs = [float(v) for v in raw["p"]]
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_USAGE, f"strategy file {path} has a non-numeric entry") from exc
    if len(probs) != inst.n:
        raise CliError(
            EXIT_USAGE,
            f"strategy has {len(probs)} entries but instance has {inst.n} cacti",
        )
    for i, v in enumerate(probs):
        if math.isnan(v) or v < 0.0 or v > 1.0:
            raise CliError(
                EXIT_USAGE, f"strategy entry for cactus {i + 1} must lie in [0, 1], got {v!r}"
            )
    total = math.fsum(probs)
    if abs(total - 1.0) > _STRATEGY_SUM_TOL:
        raise CliError(
            EXIT_USAGE, f"strategy probabilities sum to {total!r}, not 1 within {_STRATEGY_SUM_TOL}"
        )
    if abs(total - 1.0) > 1e-12:
        probs = [v / total for v in probs]
    return Strategy(tuple(probs))


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _render(obj: dict, csv_lines: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(obj, indent=2) + "\n"
    return "\n".join(csv_lines) + "\n"


def _cmd_validate(args) -> tuple[str, int]:
    inst = _load_instance(args.instance)
    obj = {"valid": True, "n": inst.n}
    csv_lines = ["field,value", "valid,true", f"n,{inst.n}"]
    return _render(obj, csv_lines, args.format), EXIT_OK


def _cmd_solve(args) -> tuple[str, int]:
    inst = _load_instance(args.instance)
    report = solve_optimal(inst)
    if not report.kkt.passes:
        raise ConsistencyError(
            "optimality certificate failed: spread "
            f"{report.kkt.max_derivative_spread_on_support!r}, excess "
            f"{report.kkt.max_off_support_excess!r} at tolerance {report.kkt.tolerance!r}"
        )
    chis = [chi(r, s) for r, s in inst.cacti()]
    probs = report.strategy.probs
    obj = {
        "mu": report.mu,
        "value": report.value,
        "support_size": report.support_size,
        "p": list(probs),
        "kkt": {
            "spread": report.kkt.max_derivative_spread_on_support,
            "excess": report.kkt.max_off_support_excess,
            "tolerance": report.kkt.tolerance,
            "passes": report.kkt.passes,
        },
        "cacti": [
            {"index": i + 1, "p": probs[i], "chi": chis[i], "support": probs[i] > 0.0}
            for i in range(inst.n)
        ],
    }
    csv_lines = ["cactus,p,chi,support,mu,value,kkt_spread,kkt_excess"]
    for i in range(inst.n):
        csv_lines.append(
            f"{i + 1},{_fmt(probs[i])},{_fmt(chis[i])},{_bool(probs[i] > 0.0)},"
            f"{_fmt(report.mu)},{_fmt(report.value)},"
            f"{_fmt(report.kkt.max_derivative_spread_on_support)},"
            f"{_fmt(report.kkt.max_off_support_excess)}"
        )
    if args.plot:
        from .plots import save_solve_figure

        save_solve_figure(inst, report, args.plot)
    return _render(obj, csv_lines, args.format), EXIT_OK


def _cmd_core(args) -> tuple[str, int]:
    inst = _load_instance(args.instance)
    result = build_core(inst, args.epsilon)
    guarantee = result.ratio >= 1.0 - result.epsilon
    obj = {
        "epsilon": result.epsilon,
        "sigma": result.sigma,
        "k": result.k,
        "core": [i + 1 for i in result.core],
        "p": list(result.core_strategy.probs),
        "core_value": result.core_value,
        "opt_value": result.opt_value,
        "ratio": result.ratio,
        "guarantee": guarantee,
    }
    members = set(result.core)
    csv_lines = ["cactus,in_core,p,sigma,k,epsilon,core_value,opt_value,ratio,guarantee"]
    for i in range(inst.n):
        csv_lines.append(
            f"{i + 1},{_bool(i in members)},{_fmt(result.core_strategy.probs[i])},"
            f"{_fmt(result.sigma)},{result.k},{_fmt(result.epsilon)},"
            f"{_fmt(result.core_value)},{_fmt(result.opt_value)},{_fmt(result.ratio)},"
            f"{_bool(guarantee)}"
        )
    if args.plot:
        from .plots import save_core_figure

        save_core_figure(inst, result, args.plot)
    return _render(obj, csv_lines, args.format), EXIT_OK if guarantee else EXIT_GUARANTEE


def _cmd_simulate(args) -> tuple[str, int]:
    inst = _load_instance(args.instance)
    if args.strategy is not None:
        strat = _load_strategy(args.strategy, inst)
    else:
        strat = solve_optimal(inst).strategy
    est = simulate(
        inst,
        strat,
        rounds=args.rounds,
        seed=args.seed,
        replications=args.replications,
        workers=args.workers,
    )
    predicted = [b(r, s, p) for (r, s), p in zip(inst.cacti(), strat.probs)]
    predicted_total = math.fsum(predicted)

    def _z(estimate: float, pred: float, se: float) -> float | None:
        return (estimate - pred) / se if se > 0.0 else None

    obj = {
        "rounds": est.rounds,
        "seed": est.seed,
        "replications": est.replications,
        "total": {
            "estimate": est.total_rate,
            "se": est.total_se,
            "predicted": predicted_total,
            "z": _z(est.total_rate, predicted_total, est.total_se),
        },
        "per_cactus": [
            {
                "index": i + 1,
                "estimate": est.per_cactus_rate[i],
                "se": est.per_cactus_se[i],
                "predicted": predicted[i],
                "z": _z(est.per_cactus_rate[i], predicted[i], est.per_cactus_se[i]),
            }
            for i in range(inst.n)
        ],
    }
    csv_lines = ["cactus,estimate,se,predicted,z"]
    for i in range(inst.n):
        z = _z(est.per_cactus_rate[i], predicted[i], est.per_cactus_se[i])
        csv_lines.append(
            f"{i + 1},{_fmt(est.per_cactus_rate[i])},{_fmt(est.per_cactus_se[i])},"
            f"{_fmt(predicted[i])},{'' if z is None else _fmt(z)}"
        )
    z_total = _z(est.total_rate, predicted_total, est.total_se)
    csv_lines.append(
        f"total,{_fmt(est.total_rate)},{_fmt(est.total_se)},{_fmt(predicted_total)},"
        f"{'' if z_total is None else _fmt(z_total)}"
    )
    if args.plot:
        from .plots import save_simulate_figure

        save_simulate_figure(est, predicted, args.plot)
    return _render(obj, csv_lines, args.format), EXIT_OK


def _sweep_rows(inst: Instance) -> list[tuple[int, float, float, float]]:
    ordered = order_by_chi(inst)
    opt_value = solve_optimal(inst).value
    rows = []
    for k in range(1, inst.n + 1):
        core_value = solve_optimal(inst.restrict(ordered.perm[:k])).value
        rows.append((k, core_value, opt_value, core_value / opt_value))
    return rows


def _cmd_sweep(args) -> tuple[str, int]:
    inst = _load_instance(args.instance)
    rows = _sweep_rows(inst)
    obj = {
        "rows": [
            {"k": k, "core_value": cv, "opt_value": ov, "ratio": ratio}
            for k, cv, ov, ratio in rows
        ]
    }
    csv_lines = ["k,core_value,opt_value,ratio"]
    for k, cv, ov, ratio in rows:
        csv_lines.append(f"{k},{_fmt(cv)},{_fmt(ov)},{_fmt(ratio)}")
    if args.plot:
        from .plots import save_sweep_figure

        save_sweep_figure(rows, args.plot)
    return _render(obj, csv_lines, args.format), EXIT_OK


def _tightness_k_bound(s: float, epsilon: float) -> int:
    # Nudge before flooring: (1-s)/(2*eps*s) can land a hair under an
    # integer it equals exactly in real arithmetic (0.5/0.1 -> 4.9999...).
    return max(1, math.floor((1.0 - s) / (2.0 * epsilon * s) + 1e-9))


def _cmd_tightness(args) -> tuple[str, int]:
    if args.n < 1:
        raise CliError(EXIT_USAGE, f"--n must be at least 1, got {args.n}")
    if not 0.0 < args.s < 1.0:
        raise CliError(EXIT_USAGE, f"--s must lie strictly between 0 and 1, got {args.s}")
    epsilons = args.epsilon
    for eps in epsilons:
        if not 0.0 < eps < 1.0:
            raise CliError(
                EXIT_USAGE, f"--epsilon must lie strictly between 0 and 1, got {eps}"
            )
    full = tightness_instance(args.n, args.s)
    opt_value = solve_optimal(full).value
    rows = []
    for eps in epsilons:
        k_bound = min(args.n, _tightness_k_bound(args.s, eps))
        core_value = solve_optimal(tightness_instance(k_bound, args.s)).value
        ratio = core_value / opt_value
        rows.append((args.n, args.s, eps, k_bound, ratio, ratio < 1.0 - eps))
    obj = {
        "rows": [
            {
                "n": n,
                "s": s,
                "epsilon": eps,
                "k_bound": k_bound,
                "ratio": ratio,
                "separated": separated,
            }
            for n, s, eps, k_bound, ratio, separated in rows
        ]
    }
    csv_lines = ["n,s,epsilon,k_bound,ratio,separated"]
    for n, s, eps, k_bound, ratio, separated in rows:
        csv_lines.append(
            f"{n},{_fmt(s)},{_fmt(eps)},{k_bound},{_fmt(ratio)},{_bool(separated)}"
        )
    if args.plot:
        from .plots import save_tightness_figure

        save_tightness_figure(rows, args.plot)
    return _render(obj, csv_lines, args.format), EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hungrybat",
        description="Optimal foraging strategies, small cores, and seeded simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, fmt_default: str) -> None:
        p.add_argument("--format", choices=("json", "csv"), default=fmt_default)
        p.add_argument("--output", metavar="PATH", default=None)

    def add_plot(p) -> None:
        p.add_argument("--plot", metavar="PATH", default=None, help="also render a PNG figure")

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("--instance", metavar="PATH", required=True)
    add_common(p, "json")

    p = sub.add_parser("solve", help="compute the optimal strategy")
    p.add_argument("--instance", metavar="PATH", required=True)
    add_common(p, "json")
    add_plot(p)

    p = sub.add_parser("core", help="build a (1-eps)-approximate core")
    p.add_argument("--instance", metavar="PATH", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    add_common(p, "json")
    add_plot(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of collection rates")
    p.add_argument("--instance", metavar="PATH", required=True)
    p.add_argument("--strategy", metavar="PATH", default=None, help="JSON {\"p\": [..]}; default: the optimal strategy")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replications", type=int, default=8)
    p.add_argument("--workers", type=int, default=1, help="threads for parallel replications")
    add_common(p, "json")
    add_plot(p)

    p = sub.add_parser("sweep", help="core value against core size k = 1..n")
    p.add_argument("--instance", metavar="PATH", required=True)
    add_common(p, "csv")
    add_plot(p)

    p = sub.add_parser("tightness", help="homogeneous family where the core bound is nearly tight")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--epsilon", type=float, action="append", required=True, help="repeatable")
    add_common(p, "csv")
    add_plot(p)

    return parser


_HANDLERS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "core": _cmd_core,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "tightness": _cmd_tightness,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", 0) < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        text, code = _HANDLERS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InstanceValidationError, DomainError, LengthMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except HungryBatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _emit(text, args.output)
    return code


def entry_point() -> None:
    raise SystemExit(main())
