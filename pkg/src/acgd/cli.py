"""Command-line harness: ``acgd run | compare | verify-rates``.

Traces are CSV with 17 significant digits, so a run is reproducible from its
flags alone. Wall-clock times go to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from .core import ConfigurationError, NormId
from .lmo import Region, RegionKind
from .problems import PROBLEM_NAMES, Problem, build_problem
from .rates import RATE_FAMILIES, verify_rates
from .solver import Mode, SolverConfig, SolverResult, Status, solve
from .stepsize import STRATEGY_NAMES, StepStrategy

TRACE_HEADER = ("iter", "objective", "gap", "t", "L", "backtracks", "gamma", "grad_evals", "fn_evals")
SUMMARY_HEADER = ("strategy", "status", "iterations", "objective_final", "gap_final", "grad_evals", "fn_evals",
                  "best_in", "message")
BEST_COLUMNS = ("iterations", "objective_final", "gap_final", "grad_evals", "fn_evals")
LMO_CHOICES = ("l1", "l2", "linf", "simplex", "nuclear", "spectral")
STOP_CHOICES = ("auto", "gap", "functional")

EXIT_OK, EXIT_SOLVER_ERROR, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce one run."""

    problem: str = "lasso"
    m: Optional[int] = None
    n: Optional[int] = None
    tau: Optional[float] = None
    data: Optional[str] = None
    strategy: str = "adaptive-adjustable"
    gamma: float = 0.25
    beta: float = 2.0
    delta: float = 1e-10
    r: int = 10
    mode: Optional[str] = None
    lmo: Optional[str] = None
    stop: str = "auto"
    tol: float = 1e-5
    max_iter: int = 3000
    seed: int = 0
    out: Optional[str] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def make_strategy(spec: RunSpec, tag: Optional[str] = None) -> StepStrategy:
    return StepStrategy(tag or spec.strategy, gamma0=spec.gamma, delta=spec.delta, beta=spec.beta, r=spec.r)


def resolve_region(spec: RunSpec, problem: Problem, mode: Mode) -> Region:
    """The LMO region: the problem default unless ``--lmo`` overrides it."""
    dim = problem.objective.dim
    if spec.lmo is None:
        if problem.region is not None and mode is problem.mode:
            return problem.region
        if mode is Mode.UNCONSTRAINED:
            return Region.l2_ball(1.0, dim)
        raise UsageError(f"problem {spec.problem!r} has no default constraint set; pass --lmo")
    kind = RegionKind(spec.lmo)
    tau = 1.0 if mode is Mode.UNCONSTRAINED else (spec.tau if spec.tau is not None else 1.0)
    if kind in (RegionKind.NUCLEAR_BALL, RegionKind.SPECTRAL_BALL):
        shape = problem.objective.shape
        if shape is None:
            raise UsageError(f"--lmo {spec.lmo} needs a matrix-valued problem")
        make = Region.nuclear_ball if kind is RegionKind.NUCLEAR_BALL else Region.spectral_ball
        return make(tau, *shape)
    if kind is RegionKind.SIMPLEX:
        if mode is Mode.UNCONSTRAINED:
            raise UsageError("the simplex is not a unit ball; use it in constrained mode")
        return Region.simplex(tau, dim)
    return {RegionKind.L1_BALL: Region.l1_ball, RegionKind.L2_BALL: Region.l2_ball,
            RegionKind.LINF_BALL: Region.linf_ball}[kind](tau, dim)


def prepare(spec: RunSpec):
    """Build ``(problem, mode, region, uses_functional_gap)`` from a spec."""
    problem = build_problem(spec.problem, m=spec.m, n=spec.n, tau=spec.tau, seed=spec.seed, data=spec.data)
    mode = Mode(spec.mode) if spec.mode else problem.mode
    region = resolve_region(spec, problem, mode)
    if spec.stop == "functional" and problem.objective.known_optimum is None:
        raise UsageError(f"problem {spec.problem!r} has no known optimum; use --stop gap")
    functional = spec.stop == "functional" or (spec.stop == "auto" and problem.objective.known_optimum is not None)
    x0 = problem.x0
    if mode is Mode.CONSTRAINED and not region.contains(x0):
        x0 = _feasible_start(region)
    return problem, mode, region, functional, x0


def _feasible_start(region: Region) -> np.ndarray:
    if region.kind is RegionKind.SIMPLEX:
        return np.full(region.dim, region.tau / region.dim)
    if region.kind is RegionKind.BOX:
        return (region.lower + region.upper) / 2.0
    return np.zeros(region.dim)


def execute(spec: RunSpec, tag: Optional[str] = None) -> SolverResult:
    problem, mode, region, functional, x0 = prepare(spec)
    strategy = make_strategy(spec, tag)
    # backtracking measures steps in l2 whatever the LMO geometry
    cfg = SolverConfig(mode, region, strategy, NormId.L2, spec.tol, spec.max_iter, spec.seed, functional)
    return solve(problem.objective, cfg, x0)


def write_trace(result: SolverResult, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for row in result.trace:
        w.writerow([fmt(row.k), fmt(row.objective), fmt(row.gap), fmt(row.t), fmt(row.L_accepted),
                    fmt(row.n_backtracks), fmt(row.gamma), fmt(row.cumulative_grad_evals),
                    fmt(row.cumulative_fn_evals)])


def trace_csv(result: SolverResult) -> str:
    buf = io.StringIO()
    write_trace(result, buf)
    return buf.getvalue()


def summary_line(result: SolverResult) -> str:
    last = result.trace[-1] if result.trace else None
    parts = [f"status={result.status.value}", f"iterations={result.iterations}"]
    if last is not None:
        parts += [f"objective={fmt(last.objective)}", f"gap={fmt(last.gap)}",
                  f"grad_evals={last.cumulative_grad_evals}", f"fn_evals={last.cumulative_fn_evals}"]
    if result.message:
        parts.append(f"message={result.message!r}")
    return " ".join(parts)


@dataclass(frozen=True)
class SummaryRow:
    strategy: str
    status: str
    iterations: Optional[int] = None
    objective_final: Optional[float] = None
    gap_final: Optional[float] = None
    grad_evals: Optional[int] = None
    fn_evals: Optional[int] = None
    message: str = ""

    @classmethod
    def from_result(cls, tag: str, result: SolverResult) -> "SummaryRow":
        if not result.trace:
            return cls(tag, result.status.value, message=result.message)
        last = result.trace[-1]
        return cls(tag, result.status.value, result.iterations, last.objective, last.gap,
                   last.cumulative_grad_evals, last.cumulative_fn_evals, result.message)


def best_marks(rows: Sequence[SummaryRow]) -> list[str]:
    """For each row, the ``;``-joined columns in which it is (jointly) smallest."""
    marks = [[] for _ in rows]
    for col in BEST_COLUMNS:
        vals = [getattr(r, col) if r.status != Status.ERROR.value else None for r in rows]
        finite = [v for v in vals if v is not None and math.isfinite(v)]
        if not finite:
            continue
        best = min(finite)
        for i, v in enumerate(vals):
            if v is not None and v == best:
                marks[i].append(col)
    return [";".join(m) for m in marks]


def write_summary(rows: Sequence[SummaryRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for row, best in zip(rows, best_marks(rows)):
        w.writerow([row.strategy, row.status] +
                   ["" if getattr(row, c) is None else fmt(getattr(row, c)) for c in BEST_COLUMNS] +
                   [best, row.message])


def compare(spec: RunSpec, strategies: Sequence[str], trace_dir: Optional[str] = None) -> list[SummaryRow]:
    """Run each strategy from the same start point; a failing row does not stop the others."""
    rows = []
    for tag in strategies:
        t0 = time.perf_counter()
        try:
            result = execute(spec, tag)
        except (ConfigurationError, UsageError, ValueError) as exc:
            rows.append(SummaryRow(tag, Status.ERROR.value, message=f"{type(exc).__name__}: {exc}"))
            continue
        print(f"{tag}: {summary_line(result)} ({time.perf_counter() - t0:.2f}s)", file=sys.stderr)
        if trace_dir:
            os.makedirs(trace_dir, exist_ok=True)
            with open(os.path.join(trace_dir, f"{tag}.csv"), "w", newline="") as fh:
                write_trace(result, fh)
        rows.append(SummaryRow.from_result(tag, result))
    return rows


# ---------------------------------------------------------------- argument parsing

CONFIG_KEYS = {f.name for f in dataclasses.fields(RunSpec)} | {"strategies", "trace_dir", "family", "horizons"}


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip().replace("-", "_")
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value.strip()
    return values


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _nonneg_float(s: str) -> float:
    v = float(s)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {s}")
    return v


def _strategy_list(s: str) -> list[str]:
    names = [t.strip() for t in s.split(",") if t.strip()]
    bad = [t for t in names if t not in STRATEGY_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown strategy {bad[0] if bad else s!r}; "
                                         f"valid: {', '.join(STRATEGY_NAMES)}")
    return names


def _horizons(s: str) -> list[int]:
    return [_positive_int(t) for t in s.split(",") if t.strip()]


def _default_seed() -> int:
    env = os.environ.get("ACGD_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"ACGD_SEED must be an integer, got {env!r}") from None


def _add_run_options(p: argparse.ArgumentParser, seed: int) -> None:
    p.add_argument("--problem", choices=PROBLEM_NAMES, default="lasso")
    p.add_argument("--m", type=_positive_int, help="rows / samples")
    p.add_argument("--n", type=_positive_int, help="dimension")
    p.add_argument("--tau", type=_positive_float, help="radius of the constraint set")
    p.add_argument("--data", help="LIBSVM file for logistic / sigmoid-ls")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--lmo", choices=LMO_CHOICES, help="override the LMO region")
    p.add_argument("--stop", choices=STOP_CHOICES, default="auto",
                   help="termination test: FW/dual-norm gap, f - f*, or f - f* when f* is known (auto)")
    p.add_argument("--tol", type=_nonneg_float, default=1e-5)
    p.add_argument("--max-iter", dest="max_iter", type=_positive_int, default=3000)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--gamma", type=float, default=0.25, help="initial Lipschitz scaling, in (0, 1]")
    p.add_argument("--beta", type=float, default=2.0, help="backtracking growth factor (> 1)")
    p.add_argument("--delta", type=_positive_float, default=1e-10)
    p.add_argument("--r", type=_positive_int, default=10, help="gamma adjustment period")


def build_parser(seed: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acgd", description="LMO-based first-order methods with adaptive steps.")
    parser.add_argument("--config", help="file of 'key = value' defaults (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one problem and write its trace")
    run.add_argument("--config", help=argparse.SUPPRESS)
    _add_run_options(run, seed)
    run.add_argument("--strategy", choices=STRATEGY_NAMES, default="adaptive-adjustable")
    run.add_argument("--out", help="trace CSV path (stdout if omitted)")

    cmp_ = sub.add_parser("compare", help="run several strategies and tabulate the results")
    cmp_.add_argument("--config", help=argparse.SUPPRESS)
    _add_run_options(cmp_, seed)
    cmp_.add_argument("--strategies", type=_strategy_list, default=list(STRATEGY_NAMES),
                      help="comma-separated list (default: all)")
    cmp_.add_argument("--strategy", type=_strategy_list, dest="strategies", help=argparse.SUPPRESS)
    cmp_.add_argument("--trace-dir", dest="trace_dir", help="also write one trace CSV per strategy here")
    cmp_.add_argument("--out", help="summary CSV path (stdout if omitted)")

    ver = sub.add_parser("verify-rates", help="check the worst-case bounds on instances with known constants")
    ver.add_argument("--config", help=argparse.SUPPRESS)
    ver.add_argument("--family", choices=RATE_FAMILIES + ("all",), default="all")
    ver.add_argument("--strategy", type=_strategy_list, default=["adaptive-constant", "adaptive-adjustable",
                                                                 "pure-backtracking"])
    ver.add_argument("--horizons", type=_horizons, default=[10, 100, 1000])
    ver.add_argument("--seed", type=int, default=seed)
    ver.add_argument("--out", help="report path (stdout if omitted)")
    return parser


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    seed = _default_seed()
    parser = build_parser(seed)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = read_config(known.config)
        # feed config values through the same converters as flags, then let real flags override
        cmd = next((a for a in argv if a in ("run", "compare", "verify-rates")), None)
        if cmd is None:
            parser.parse_args(argv)  # reports the missing subcommand
        flags = []
        for key, value in cfg.items():
            flags += [f"--{key.replace('_', '-')}", value]
        sub = parser._subparsers._group_actions[0].choices[cmd]
        unused = set(cfg) - {a.dest for a in sub._actions}
        if unused:
            raise UsageError(f"config keys not valid for {cmd!r}: {', '.join(sorted(unused))}")
        base = sub.parse_args(flags)
        sub.set_defaults(**{key: getattr(base, key) for key in cfg})
    return parser.parse_args(argv)


def spec_from_args(args: argparse.Namespace, strategy: Optional[str] = None) -> RunSpec:
    names = {f.name for f in dataclasses.fields(RunSpec)}
    kwargs = {k: v for k, v in vars(args).items() if k in names and k != "strategy"}
    return RunSpec(strategy=strategy or getattr(args, "strategy", None) or "adaptive-adjustable", **kwargs)


def _open_out(path: Optional[str]):
    if path is None:
        return None
    return open(path, "w", newline="")


def cmd_run(args) -> int:
    spec = spec_from_args(args)
    make_strategy(spec)  # validate beta / gamma / r before any work
    t0 = time.perf_counter()
    result = execute(spec)
    fh = _open_out(spec.out)
    try:
        write_trace(result, fh or sys.stdout)
    finally:
        if fh:
            fh.close()
    print(summary_line(result), file=sys.stderr if spec.out is None else sys.stdout)
    print(f"wall-clock {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return EXIT_SOLVER_ERROR if result.status is Status.ERROR else EXIT_OK


def cmd_compare(args) -> int:
    spec = spec_from_args(args, strategy=args.strategies[0])
    make_strategy(spec)
    rows = compare(spec, args.strategies, args.trace_dir)
    fh = _open_out(spec.out)
    try:
        write_summary(rows, fh or sys.stdout)
    finally:
        if fh:
            fh.close()
    for row in rows:
        if row.status == Status.ERROR.value:
            print(f"{row.strategy}: {row.message}", file=sys.stderr)
    return EXIT_SOLVER_ERROR if any(r.status == Status.ERROR.value for r in rows) else EXIT_OK


def cmd_verify(args) -> int:
    families = RATE_FAMILIES if args.family == "all" else (args.family,)
    lines, ok = [], True
    for fam in families:
        for tag in args.strategy:
            report = verify_rates(fam, tag, args.horizons, args.seed)
            lines += report.lines()
            ok &= report.ok
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print("no violations" if ok else "VIOLATIONS FOUND", file=sys.stderr)
    return EXIT_OK if ok else EXIT_SOLVER_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"acgd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    handler = {"run": cmd_run, "compare": cmd_compare, "verify-rates": cmd_verify}[args.command]
    try:
        return handler(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"acgd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"acgd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
