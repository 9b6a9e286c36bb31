"""Empirical check of the worst-case convergence bounds on instances whose
constants (L, mu, eta, D, R, zeta, max gradient norm) are computable exactly.

Each bound is evaluated against a single long run of the solver; for horizon
``N`` we read row ``N`` of the trace (or the final row if the run stopped
earlier, which only makes the check stricter because the objective column is
nonincreasing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import NormId
from .lmo import Region, diameter
from .problems import (SyntheticSpec, lasso_data, make_lasso, make_simplex_qp, random_indefinite_q, spd_matrix)
from .core import Objective
from .solver import Mode, SolverConfig, SolverResult, solve
from .stepsize import StepStrategy

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"

UNCONSTRAINED_NONCONVEX = "unconstrained-nonconvex"
UNCONSTRAINED_QUASAR = "unconstrained-quasar-convex"
UNCONSTRAINED_STRONGLY_CONVEX = "unconstrained-strongly-convex"
CONSTRAINED_NONCONVEX = "constrained-nonconvex"
CONSTRAINED_QUASAR = "constrained-quasar-convex"

RATE_FAMILIES = ("quadratic", "simplex-qp", "lasso")


@dataclass(frozen=True)
class RateBound:
    """Problem constants entering the bounds; None means unknown."""

    L: Optional[float] = None
    mu: Optional[float] = None
    eta: Optional[float] = None
    D: Optional[float] = None
    R: Optional[float] = None
    zeta: Optional[float] = None
    max_grad: Optional[float] = None
    C: Optional[float] = None

    def __post_init__(self):
        if self.eta is not None and not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")


def constrained_constant(L: float, beta: float, delta: float, max_grad: float, D: float) -> float:
    """``max{beta (L + delta), max ||grad f||, 1} * max{D, 1}^2``."""
    return max(beta * (L + delta), max_grad, 1.0) * max(D, 1.0) ** 2


def with_constant(rb: RateBound, beta: float, delta: float) -> RateBound:
    if rb.C is not None or None in (rb.L, rb.max_grad, rb.D):
        return rb
    return RateBound(rb.L, rb.mu, rb.eta, rb.D, rb.R, rb.zeta, rb.max_grad,
                     constrained_constant(rb.L, beta, delta, rb.max_grad, rb.D))


# ---- the bounds themselves, as plain functions of the horizon N


def unconstrained_nonconvex_bound(N, L, beta, delta, zeta, h0):
    """Bound on ``min_{k<=N} Gap_k^2``."""
    return 2.0 * beta * (L + delta) * zeta ** 2 * h0 / (N + 1)


def unconstrained_quasar_bound(N, L, beta, delta, zeta, R, eta, h0):
    """Bound on ``h_N`` (zeta enters squared, as in the descent argument)."""
    K = 2.0 * beta * (L + delta) * zeta ** 2 * R ** 2
    return K / (K / h0 + N * eta ** 2)


def strongly_convex_bound(N, L, beta, delta, zeta, mu, h0):
    return (1.0 - mu / (beta * (L + delta) * zeta ** 2)) ** N * h0


def constrained_nonconvex_bound(N, C, h0):
    """Bound on ``min_{k<=N} Gap_k``."""
    return math.sqrt(2.0 * C * h0 / (N + 1))


def constrained_quasar_bound(N, C, eta, h0):
    return 2.0 * C / (N * eta ** 2 + 2.0 * C / h0)


# ---- reporting


@dataclass(frozen=True)
class BoundCheck:
    label: str
    N: int
    observed: float
    bound: float
    status: str
    note: str = ""


@dataclass
class RateReport:
    family: str
    strategy: str
    constants: RateBound
    checks: list[BoundCheck] = field(default_factory=list)
    solver_status: str = ""

    @property
    def violations(self) -> list[BoundCheck]:
        return [c for c in self.checks if c.status == FAIL]

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            if c.status == SKIPPED:
                out.append(f"{self.family:<11} {self.strategy:<20} {c.label:<30} N={c.N:<5} skipped ({c.note})")
            else:
                out.append(f"{self.family:<11} {self.strategy:<20} {c.label:<30} N={c.N:<5} "
                           f"observed={c.observed:.6e} bound={c.bound:.6e} {c.status}")
        return out


@dataclass
class RateInstance:
    objective: Objective
    region: Region
    mode: Mode
    x0: np.ndarray
    f_lower: float  # f* itself, or a lower bound on it
    constants: RateBound


def _quadratic_instance(seed: int, n: int = 20, cond: float = 10.0) -> RateInstance:
    H = spd_matrix(n, cond, seed)
    eig = np.linalg.eigvalsh(H)
    mu, L = float(eig[0]), float(eig[-1])
    obj = Objective(n, lambda x: 0.5 * float(x @ H @ x), lambda x: H @ x, known_lipschitz=L,
                    known_optimum=0.0, name="quadratic")
    x0 = np.random.default_rng(seed + 1).standard_normal(n)
    # the sublevel set {x^T H x <= x0^T H x0} reaches ||x||_2 = sqrt(x0^T H x0 / mu)
    R = max(math.sqrt(float(x0 @ H @ x0) / mu), 1.0)
    return RateInstance(obj, Region.l2_ball(1.0, n), Mode.UNCONSTRAINED, x0, 0.0,
                        RateBound(L=L, mu=mu, eta=1.0, R=R, zeta=1.0))


def _simplex_qp_instance(seed: int, n: int = 100) -> RateInstance:
    Q = random_indefinite_q(n, seed)
    obj, region = make_simplex_qp(Q)
    Qs = (Q + Q.T) / 2.0
    L = 2.0 * float(np.max(np.abs(np.linalg.eigvalsh(Qs))))
    max_grad = 2.0 * float(np.max(np.linalg.norm(Qs, axis=0)))  # ||2 Q x|| is convex, so a vertex attains it
    f_lower = float(np.min(Qs))  # x^T Q x >= min_ij Q_ij on the simplex
    return RateInstance(obj, region, Mode.CONSTRAINED, np.full(n, 1.0 / n), f_lower,
                        RateBound(L=L, D=diameter(region, NormId.L2), max_grad=max_grad))


def _lasso_instance(seed: int, m: int = 200, n: int = 1000, tau: float = 10.0) -> RateInstance:
    spec = SyntheticSpec(m, n, tau, seed)
    obj, region, _ = make_lasso(spec)
    A, b, _ = lasso_data(spec)
    L = 2.0 * float(np.linalg.eigvalsh(A.T @ A)[-1])
    # ||2 A^T (A x - b)||_2 is convex in x; its max over the l1 ball sits at some +-tau e_j
    G = 2.0 * A.T @ A
    c = 2.0 * A.T @ b
    max_grad = max(float(np.max(np.linalg.norm(tau * G - c[:, None], axis=0))),
                   float(np.max(np.linalg.norm(-tau * G - c[:, None], axis=0))))
    return RateInstance(obj, region, Mode.CONSTRAINED, np.zeros(n), 0.0,
                        RateBound(L=L, eta=1.0, D=diameter(region, NormId.L2), max_grad=max_grad))


def rate_instance(family: str, seed: int = 0) -> RateInstance:
    if family == "quadratic":
        return _quadratic_instance(seed)
    if family == "simplex-qp":
        return _simplex_qp_instance(seed)
    if family == "lasso":
        return _lasso_instance(seed)
    raise ValueError(f"unknown rate family {family!r}; valid: {', '.join(RATE_FAMILIES)}")


def check_trace(result: SolverResult, inst: RateInstance, strategy: StepStrategy,
                horizons: Sequence[int], family: str = "") -> RateReport:
    """Compare a finished run against every bound applicable to its mode."""
    beta, delta = strategy.beta, strategy.delta
    rb = with_constant(inst.constants, beta, delta)
    report = RateReport(family, strategy.tag.value, rb, solver_status=result.status.value)
    obj_col = result.column("objective")
    gap_col = result.column("gap")
    h = obj_col - inst.f_lower
    h0 = h[0]

    def row(N):
        return min(N, len(h) - 1)

    def add(label, N, needed, observed_fn, bound_fn):
        missing = [name for name, val in needed.items() if val is None]
        if missing:
            report.checks.append(BoundCheck(label, N, math.nan, math.nan, SKIPPED,
                                            "missing " + ", ".join(missing)))
            return
        obs, bnd = observed_fn(N), bound_fn(N)
        report.checks.append(BoundCheck(label, N, obs, bnd, PASS if obs <= bnd else FAIL))

    for N in horizons:
        if N < 1:
            raise ValueError("horizons must be >= 1")
        min_gap = lambda N: float(np.min(gap_col[: row(N) + 1]))
        if inst.mode is Mode.UNCONSTRAINED:
            add(UNCONSTRAINED_NONCONVEX, N, {"L": rb.L, "zeta": rb.zeta},
                lambda N: min_gap(N) ** 2,
                lambda N: unconstrained_nonconvex_bound(N, rb.L, beta, delta, rb.zeta, h0))
            add(UNCONSTRAINED_QUASAR, N, {"L": rb.L, "zeta": rb.zeta, "R": rb.R, "eta": rb.eta},
                lambda N: h[row(N)],
                lambda N: unconstrained_quasar_bound(N, rb.L, beta, delta, rb.zeta, rb.R, rb.eta, h0))
            add(UNCONSTRAINED_STRONGLY_CONVEX, N, {"L": rb.L, "zeta": rb.zeta, "mu": rb.mu},
                lambda N: h[row(N)],
                lambda N: strongly_convex_bound(N, rb.L, beta, delta, rb.zeta, rb.mu, h0))
        else:
            add(CONSTRAINED_NONCONVEX, N, {"C": rb.C}, min_gap,
                lambda N: constrained_nonconvex_bound(N, rb.C, h0))
            add(CONSTRAINED_QUASAR, N, {"C": rb.C, "eta": rb.eta},
                lambda N: h[row(N)],
                lambda N: constrained_quasar_bound(N, rb.C, rb.eta, h0))
    if result.status.value == "error":
        report.checks.append(BoundCheck("solver", len(h) - 1, math.nan, math.nan, FAIL, result.message))
    return report


def verify_rates(family: str, strategy="adaptive-adjustable", horizons: Sequence[int] = (10, 100, 1000),
                 seed: int = 0) -> RateReport:
    """Run one solve with ``tol = 0`` up to ``max(horizons)`` and check every bound."""
    if isinstance(strategy, str):
        strategy = StepStrategy(strategy)
    inst = rate_instance(family, seed)
    cfg = SolverConfig(inst.mode, inst.region, strategy, tol=0.0, max_iter=max(horizons), seed=seed)
    result = solve(inst.objective, cfg, inst.x0)
    return check_trace(result, inst, strategy, horizons, family)
