import math

import numpy as np
import pytest

from acgd.rates import (CONSTRAINED_NONCONVEX, CONSTRAINED_QUASAR, FAIL, PASS, SKIPPED, UNCONSTRAINED_NONCONVEX,
                        UNCONSTRAINED_QUASAR, UNCONSTRAINED_STRONGLY_CONVEX, RateBound, check_trace,
                        constrained_constant, constrained_nonconvex_bound, constrained_quasar_bound, rate_instance,
                        strongly_convex_bound, unconstrained_nonconvex_bound, unconstrained_quasar_bound,
                        verify_rates, with_constant)
from acgd.solver import SolverConfig, solve
from acgd.stepsize import StepStrategy


def test_constant_formula():
    assert constrained_constant(L=3.0, beta=2.0, delta=0.0, max_grad=1.0, D=0.5) == 6.0
    assert constrained_constant(L=0.1, beta=2.0, delta=0.0, max_grad=5.0, D=2.0) == 20.0
    assert constrained_constant(L=0.1, beta=2.0, delta=0.0, max_grad=0.5, D=0.1) == 1.0


def test_with_constant_fills_only_when_derivable():
    rb = RateBound(L=1.0, D=math.sqrt(2), max_grad=3.0)
    assert with_constant(rb, 2.0, 0.0).C == pytest.approx(6.0)
    assert with_constant(RateBound(L=1.0), 2.0, 0.0).C is None
    assert with_constant(RateBound(C=7.0), 2.0, 0.0).C == 7.0


def test_eta_range_checked():
    with pytest.raises(ValueError):
        RateBound(eta=0.0)
    with pytest.raises(ValueError):
        RateBound(eta=1.5)


def test_bound_formulas_at_known_points():
    assert unconstrained_nonconvex_bound(N=3, L=1.0, beta=2.0, delta=0.0, zeta=1.0, h0=4.0) == 4.0
    assert unconstrained_quasar_bound(N=0, L=1.0, beta=2.0, delta=0.0, zeta=1.0, R=1.0, eta=1.0, h0=5.0) == 5.0
    K4 = unconstrained_quasar_bound(N=4, L=1.0, beta=2.0, delta=0.0, zeta=1.0, R=1.0, eta=1.0, h0=4.0)
    assert K4 == pytest.approx(4.0 / (1.0 + 4.0))
    assert strongly_convex_bound(N=2, L=1.0, beta=2.0, delta=0.0, zeta=1.0, mu=1.0, h0=8.0) == 2.0
    assert constrained_nonconvex_bound(N=1, C=1.0, h0=1.0) == 1.0
    assert constrained_quasar_bound(N=0, C=3.0, eta=1.0, h0=2.0) == 2.0
    assert constrained_quasar_bound(N=2, C=1.0, eta=1.0, h0=1.0) == 0.5


def test_bounds_shrink_with_N():
    for N in (1, 10, 100):
        assert constrained_quasar_bound(N + 1, 2.0, 1.0, 3.0) < constrained_quasar_bound(N, 2.0, 1.0, 3.0)
        assert constrained_nonconvex_bound(N + 1, 2.0, 3.0) < constrained_nonconvex_bound(N, 2.0, 3.0)


def test_quadratic_checks_all_unconstrained_bounds():
    report = verify_rates("quadratic", "adaptive-constant", horizons=(1, 10, 100))
    labels = {c.label for c in report.checks}
    assert labels == {UNCONSTRAINED_NONCONVEX, UNCONSTRAINED_QUASAR, UNCONSTRAINED_STRONGLY_CONVEX}
    assert report.ok and all(c.status == PASS for c in report.checks)


def test_simplex_qp_skips_quasar_bound_without_eta():
    report = verify_rates("simplex-qp", "adaptive-adjustable", horizons=(1, 10, 100))
    by_label = {}
    for c in report.checks:
        by_label.setdefault(c.label, set()).add(c.status)
    assert by_label[CONSTRAINED_NONCONVEX] == {PASS}
    assert by_label[CONSTRAINED_QUASAR] == {SKIPPED}
    assert report.constants.D == pytest.approx(math.sqrt(2))
    assert report.ok


def test_lasso_checks_constrained_bounds():
    report = verify_rates("lasso", "pure-backtracking", horizons=(1, 10))
    assert {c.label for c in report.checks} == {CONSTRAINED_NONCONVEX, CONSTRAINED_QUASAR}
    assert report.ok


def test_violation_is_reported():
    # a constant C far below the true one makes the constrained bounds fail
    inst = rate_instance("simplex-qp", seed=0)
    inst.constants = RateBound(C=1e-12, eta=1.0)
    strategy = StepStrategy()
    res = solve(inst.objective, SolverConfig(inst.mode, inst.region, strategy, tol=0.0, max_iter=10), inst.x0)
    report = check_trace(res, inst, strategy, (10,))
    assert not report.ok and all(c.status == FAIL for c in report.violations)
    assert any("fail" in line for line in report.lines())


def test_unknown_family():
    with pytest.raises(ValueError, match="quadratic"):
        rate_instance("nope")


def test_horizon_must_be_positive():
    with pytest.raises(ValueError):
        verify_rates("quadratic", horizons=(0,))
