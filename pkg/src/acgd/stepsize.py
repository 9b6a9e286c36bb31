"""Step-size rules: adaptive local-Lipschitz backtracking and the classic baselines.

The adaptive rules warm-start a backtracking search with a scaled estimate of
the local Lipschitz constant of the gradient,

    L_k = ||grad f(x_k) - grad f(x_{k-1})||_* / ||x_k - x_{k-1}|| + delta,

and then double ``L_k`` until the quadratic upper bound

    f(x + t d) <= f(x) + t <grad f(x), d> + (L_k / 2) t^2 ||d||^2

holds for ``t = min(-<grad f(x), d> / (L_k ||d||^2), t_max)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ConfigurationError, DimensionError, NormId, NumericalError, Objective, dual_norm, norm

PROBE_EPS = 1e-6
MAX_BACKTRACK_ROUNDS = 100


class DegenerateDirectionError(NumericalError):
    """The search direction is the zero vector."""


class BacktrackingError(NumericalError):
    """Sufficient decrease was never reached; usually a value/gradient mismatch."""


class StrategyTag(enum.Enum):
    ADAPTIVE_CONSTANT = "adaptive-constant"
    ADAPTIVE_ADJUSTABLE = "adaptive-adjustable"
    PURE_BACKTRACKING = "pure-backtracking"
    SHORT_STEP = "short-step"
    OPEN_LOOP = "open-loop"

    @classmethod
    def parse(cls, name: str) -> "StrategyTag":
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown strategy {name!r}; valid: {', '.join(STRATEGY_NAMES)}") from None


STRATEGY_NAMES = tuple(t.value for t in StrategyTag)
ADAPTIVE_TAGS = (StrategyTag.ADAPTIVE_CONSTANT, StrategyTag.ADAPTIVE_ADJUSTABLE, StrategyTag.PURE_BACKTRACKING)


@dataclass(frozen=True)
class StepStrategy:
    tag: StrategyTag = StrategyTag.ADAPTIVE_ADJUSTABLE
    gamma0: float = 0.25
    delta: float = 1e-10
    beta: float = 2.0
    r: int = 10
    eta_down: float = 0.9
    eta_up: float = 1.1
    pb_decrease: float = 0.9
    global_L: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.tag, str):
            object.__setattr__(self, "tag", StrategyTag.parse(self.tag))
        if not 0 < self.gamma0 <= 1:
            raise ConfigurationError("gamma0 must lie in (0, 1]")
        if not self.delta > 0:
            raise ConfigurationError("delta must be positive")
        if not self.beta > 1:
            raise ConfigurationError("beta must exceed 1")
        if self.r < 1:
            raise ConfigurationError("period r must be >= 1")
        if not 0 < self.pb_decrease < 1:
            raise ConfigurationError("pb_decrease must lie in (0, 1)")

    @property
    def is_adaptive(self) -> bool:
        return self.tag in ADAPTIVE_TAGS


@dataclass
class StepState:
    L_current: float
    gamma_current: float
    prev_x: Optional[np.ndarray] = None
    prev_grad: Optional[np.ndarray] = None
    backtracks_in_period: int = 0
    iter_in_period: int = 0


@dataclass(frozen=True)
class StepOutcome:
    t: float
    L_accepted: float
    n_backtracks: int = 0
    f_new: Optional[float] = field(default=None, compare=False)


def estimate_local_lipschitz(grad_k, grad_km1, x_k, x_km1, p: NormId = NormId.L2, delta: float = 1e-10):
    """Gradient-difference Lipschitz estimate plus `delta`.

    Returns None when the two iterates coincide; the caller then reuses its
    previous estimate.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not (len(grad_k) == len(grad_km1) == len(x_k) == len(x_km1)):
        raise DimensionError("gradients and iterates must have the same length")
    dx = norm(p, np.subtract(x_k, x_km1))
    if dx == 0.0:
        return None
    return dual_norm(p, np.subtract(grad_k, grad_km1)) / dx + delta


def candidate_step(inner: float, L: float, d_norm_sq: float, t_max: float) -> float:
    if d_norm_sq == 0.0:
        raise DegenerateDirectionError("zero search direction")
    if not L > 0:
        raise ValueError("L must be positive")
    return max(0.0, min(-inner / (L * d_norm_sq), t_max))


def short_step(inner: float, L: Optional[float], d_norm_sq: float, t_max: float) -> float:
    """Step minimizing the descent-lemma upper bound with the global constant `L`."""
    if L is None:
        raise ConfigurationError("short-step needs a known global Lipschitz constant")
    return candidate_step(inner, L, d_norm_sq, t_max)


def open_loop_step(k: int) -> float:
    if k < 0:
        raise ValueError("k must be >= 0")
    return 2.0 / (k + 2)


def _decrease_holds(f_new, fx, t, inner, L, d_norm_sq) -> bool:
    # t * (inner + L t ||d||^2 / 2) is <= 0 whenever t <= -inner / (L ||d||^2)
    return f_new <= fx + t * (inner + 0.5 * L * t * d_norm_sq)


def sufficient_decrease(obj: Objective, x, d, t: float, L: float, p: NormId = NormId.L2,
                        fx: Optional[float] = None, inner: Optional[float] = None) -> bool:
    if t < 0 or not L > 0:
        raise ValueError("need t >= 0 and L > 0")
    if t == 0:
        return True
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if fx is None:
        fx = obj.value(x)
    if inner is None:
        inner = float(obj.grad(x) @ d)
    return _decrease_holds(obj.value(x + t * d), fx, t, inner, L, norm(p, d) ** 2)


def backtrack(obj: Objective, x, d, inner: float, p: NormId, t_max: float, L_init: float,
              beta: float = 2.0, max_rounds: int = MAX_BACKTRACK_ROUNDS, fx: Optional[float] = None) -> StepOutcome:
    """Grow ``L`` geometrically from `L_init` until sufficient decrease holds.

    The returned outcome carries the objective at the accepted point so the
    caller does not have to evaluate it again.
    """
    if not L_init > 0 or not beta > 1 or max_rounds < 1:
        raise ValueError("need L_init > 0, beta > 1, max_rounds >= 1")
    d_norm_sq = norm(p, d) ** 2
    if fx is None:
        fx = obj.value(x)
    L = L_init
    for m in range(max_rounds + 1):
        t = candidate_step(inner, L, d_norm_sq, t_max)
        if t == 0.0:
            return StepOutcome(0.0, L, m, fx)
        f_new = obj.value(x + t * d)
        if _decrease_holds(f_new, fx, t, inner, L, d_norm_sq):
            return StepOutcome(t, L, m, f_new)
        L *= beta
    raise BacktrackingError(f"no sufficient decrease after {max_rounds} backtracking rounds (L={L:.3e})")


GAMMA_MAX = 1.0


def update_gamma(gamma: float, backtracks_in_period: int, r: int,
                 eta_down: float = 0.9, eta_up: float = 1.1) -> float:
    """Rescale gamma after a period: shrink if nothing backtracked, grow if more than r did."""
    if backtracks_in_period == 0:
        return eta_down * gamma
    if backtracks_in_period > r:
        return eta_up * gamma
    return gamma


def init_state(strategy: StepStrategy, obj: Objective, x0: np.ndarray, grad0: np.ndarray,
               p: NormId = NormId.L2, seed: int = 0) -> StepState:
    """Initial state; adaptive rules probe a point at distance PROBE_EPS from x0.

    The probe costs one gradient evaluation and stands in for the missing
    previous iterate at k = 0.
    """
    if not strategy.is_adaptive:
        L = strategy.global_L if strategy.global_L is not None else obj.known_lipschitz
        return StepState(L_current=L if L is not None else math.nan, gamma_current=strategy.gamma0)
    u = np.random.default_rng(seed).standard_normal(x0.size)
    u /= np.linalg.norm(u)
    x_probe = x0 + PROBE_EPS * u
    g_probe = obj.grad(x_probe)
    L0 = estimate_local_lipschitz(grad0, g_probe, x0, x_probe, p, strategy.delta)
    if L0 is None:  # probe vanished in rounding
        L0 = 1.0
    return StepState(L_current=L0, gamma_current=strategy.gamma0, prev_x=x_probe, prev_grad=g_probe)


def next_step(strategy: StepStrategy, state: StepState, obj: Objective, x: np.ndarray, grad: np.ndarray,
              d: np.ndarray, p: NormId, t_max: float, k: int, fx: Optional[float] = None):
    """Compute the step for iteration `k` and advance `state` in place.

    Returns ``(outcome, state)``.
    """
    inner = float(grad @ d)
    tag = strategy.tag
    if tag is StrategyTag.OPEN_LOOP:
        return StepOutcome(min(open_loop_step(k), t_max), math.nan, 0), state
    if tag is StrategyTag.SHORT_STEP:
        L = strategy.global_L if strategy.global_L is not None else obj.known_lipschitz
        t = short_step(inner, L, norm(p, d) ** 2, t_max)
        return StepOutcome(t, L, 0), state

    if tag is StrategyTag.PURE_BACKTRACKING:
        L_init = strategy.pb_decrease * state.L_current
    else:
        est = estimate_local_lipschitz(grad, state.prev_grad, x, state.prev_x, p, strategy.delta)
        if est is None:
            est = state.L_current + strategy.delta
        L_init = state.gamma_current * est

    out = backtrack(obj, x, d, inner, p, t_max, L_init, strategy.beta, fx=fx)
    state.L_current = out.L_accepted
    state.prev_x = x
    state.prev_grad = grad
    if tag is StrategyTag.ADAPTIVE_ADJUSTABLE:
        state.backtracks_in_period += out.n_backtracks
        state.iter_in_period += 1
        if state.iter_in_period == strategy.r:
            # the scaling never exceeds 1, so the first trial L stays at or below L + delta
            state.gamma_current = min(update_gamma(state.gamma_current, state.backtracks_in_period, strategy.r,
                                                   strategy.eta_down, strategy.eta_up), GAMMA_MAX)
            state.backtracks_in_period = 0
            state.iter_in_period = 0
    return out, state
