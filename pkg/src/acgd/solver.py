"""Conditional-gradient / normalized-steepest-descent driver with pluggable step rules."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import ConfigurationError, CountingObjective, DimensionError, NormId, NumericalError, Objective, as_vector
from .lmo import Region, lmo
from .stepsize import StepStrategy, init_state, next_step

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    CONSTRAINED = "constrained"
    UNCONSTRAINED = "unconstrained"

    @property
    def t_max(self) -> float:
        return 1.0 if self is Mode.CONSTRAINED else math.inf


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    ERROR = "error"


class InfeasibleStartError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    mode: Mode
    region: Region
    strategy: StepStrategy = field(default_factory=StepStrategy)
    backtrack_norm: NormId = NormId.L2
    tol: float = 1e-5
    max_iter: int = 3000
    seed: int = 0
    use_functional_gap: bool = False

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode))
        if not self.tol >= 0:
            raise ConfigurationError("tol must be nonnegative")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be positive")


@dataclass(frozen=True)
class TraceRow:
    k: int
    objective: float
    gap: float
    t: float
    L_accepted: float
    n_backtracks: int
    gamma: float
    cumulative_grad_evals: int
    cumulative_fn_evals: int


@dataclass
class SolverResult:
    final_x: np.ndarray
    status: Status
    trace: list[TraceRow]
    message: str = ""

    @property
    def iterations(self) -> int:
        """Number of steps taken (the last trace row is the final iterate)."""
        return max(len(self.trace) - 1, 0)

    @property
    def final_objective(self) -> float:
        return self.trace[-1].objective if self.trace else math.nan

    @property
    def final_gap(self) -> float:
        return self.trace[-1].gap if self.trace else math.nan

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.trace], dtype=float)


def direction(mode: Mode, v: np.ndarray, x: np.ndarray) -> np.ndarray:
    if len(v) != len(x):
        raise DimensionError("v and x must have the same length")
    return np.array(v, dtype=np.float64) if mode is Mode.UNCONSTRAINED else v - x


def gap(mode: Mode, grad: np.ndarray, d: np.ndarray) -> float:
    """Criticality certificate ``-<grad, d>``: the Frank-Wolfe gap, or the dual norm
    of the gradient for unit-ball steepest descent."""
    return -float(np.dot(grad, d))


def solve(obj: Objective, config: SolverConfig, x0,
          callback: Optional[Callable[[int, np.ndarray], None]] = None) -> SolverResult:
    """Run the LMO-based method until the gap (or functional gap) drops to `tol`.

    Row ``k`` of the trace describes iterate ``x_k`` and the step taken from
    it; the last row is the returned iterate, with ``t = 0``. Objective and
    step errors end the run with status ERROR and the partial trace.
    """
    x = as_vector(x0, "x0").copy()
    if x.size != obj.dim:
        raise DimensionError(f"x0 has length {x.size}, objective expects {obj.dim}")
    mode = config.mode
    region = config.region
    if mode is Mode.CONSTRAINED and not region.contains(x):
        raise InfeasibleStartError("x0 is not in the feasible region")
    f_star = obj.known_optimum
    if config.use_functional_gap and f_star is None:
        raise ConfigurationError("functional-gap termination needs objective.known_optimum")

    counted = CountingObjective(obj)
    strategy = config.strategy
    p = config.backtrack_norm
    trace: list[TraceRow] = []
    status = Status.MAX_ITER
    message = ""
    try:
        fx = counted.value(x)
        g = counted.grad(x)
        state = init_state(strategy, counted, x, g, p, config.seed)
        for k in range(config.max_iter + 1):
            if callback is not None:
                callback(k, x)
            v = lmo(region, g)
            d = direction(mode, v, x)
            gk = gap(mode, g, d)
            gamma = state.gamma_current
            if config.use_functional_gap:
                done = fx - f_star <= config.tol
            else:
                done = gk <= config.tol
            stationary = not np.any(d)
            if done or stationary or k == config.max_iter:
                trace.append(TraceRow(k, fx, gk, 0.0, math.nan, 0, gamma, counted.grad_evals, counted.fn_evals))
                if done or stationary:
                    status = Status.CONVERGED
                break
            out, state = next_step(strategy, state, counted, x, g, d, p, mode.t_max, k, fx)
            trace.append(TraceRow(k, fx, gk, out.t, out.L_accepted, out.n_backtracks, gamma,
                                  counted.grad_evals, counted.fn_evals))
            x = x + out.t * d
            if not np.all(np.isfinite(x)):
                raise NumericalError("iterate became non-finite")
            fx = out.f_new if out.f_new is not None else counted.value(x)
            g = counted.grad(x)
    except (NumericalError, ConfigurationError) as exc:
        status = Status.ERROR
        message = f"{type(exc).__name__}: {exc}"
        log.warning("solve aborted at k=%d: %s", len(trace), message)
    return SolverResult(final_x=x, status=status, trace=trace, message=message)
