import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acgd.core import ConfigurationError, DimensionError, NormId, Objective, norm
from acgd.stepsize import (BacktrackingError, DegenerateDirectionError, StepState, StepStrategy, StrategyTag,
                           backtrack, candidate_step, estimate_local_lipschitz, init_state, next_step,
                           open_loop_step, short_step, sufficient_decrease, update_gamma)

DELTA = 1e-10


def half_sq(dim=2, curvature=1.0):
    return Objective(dim, lambda x: 0.5 * curvature * float(x @ x), lambda x: curvature * np.asarray(x),
                     known_lipschitz=curvature)


# ---- local Lipschitz estimate


def test_estimate_examples():
    assert estimate_local_lipschitz([2, 0], [0, 0], [1, 0], [0, 0], NormId.L2, DELTA) == 2 + DELTA
    assert estimate_local_lipschitz([1, 1], [1, 1], [0, 1], [3, 2], NormId.L2, DELTA) == DELTA
    L = 3.5
    x, y = np.array([0.7]), np.array([-2.2])
    assert estimate_local_lipschitz(L * x, L * y, x, y, NormId.L2, DELTA) == pytest.approx(L + DELTA, rel=1e-15)


def test_estimate_zero_displacement_and_errors():
    assert estimate_local_lipschitz([1, 0], [0, 0], [1, 1], [1, 1]) is None
    with pytest.raises(DimensionError):
        estimate_local_lipschitz([1, 0], [0], [1, 1], [1, 1])
    with pytest.raises(ValueError):
        estimate_local_lipschitz([1], [0], [1], [0], NormId.L2, 0.0)


def test_estimate_uses_dual_norm_for_gradients():
    # p = l1: gradient difference in l-inf over displacement in l1
    est = estimate_local_lipschitz([3, -4], [0, 0], [1, 1], [0, 0], NormId.L1, DELTA)
    assert est == pytest.approx(4 / 2 + DELTA)


# ---- candidate / short / open-loop


@pytest.mark.parametrize("inner, L, d2, tmax, expected", [
    (-4, 2, 1, 1, 1.0),
    (-1, 2, 1, math.inf, 0.5),
    (0, 7, 1, 1, 0.0),
])
def test_candidate_step_examples(inner, L, d2, tmax, expected):
    assert candidate_step(inner, L, d2, tmax) == expected


def test_candidate_step_degenerate_direction():
    with pytest.raises(DegenerateDirectionError):
        candidate_step(-1.0, 1.0, 0.0, 1.0)


@given(st.floats(-1e3, 0), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3),
       st.sampled_from([1.0, math.inf]))
def test_candidate_step_nonincreasing_in_L(inner, L1, dL, d2, tmax):
    assert candidate_step(inner, L1 + dL, d2, tmax) <= candidate_step(inner, L1, d2, tmax)


@given(st.floats(-1e3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.sampled_from([1.0, math.inf]))
def test_candidate_step_in_range(inner, L, d2, tmax):
    t = candidate_step(inner, L, d2, tmax)
    assert 0.0 <= t <= tmax


@pytest.mark.parametrize("inner, expected", [(-2, 0.5), (-8, 1.0), (0, 0.0)])
def test_short_step_examples(inner, expected):
    assert short_step(inner, 1.0, 4.0, 1.0) == expected


def test_short_step_needs_L():
    with pytest.raises(ConfigurationError):
        short_step(-1.0, None, 1.0, 1.0)


def test_open_loop_examples():
    assert open_loop_step(0) == 1.0
    assert open_loop_step(2) == 0.5
    assert open_loop_step(998) == 0.002
    with pytest.raises(ValueError):
        open_loop_step(-1)


# ---- sufficient decrease and backtracking


def test_sufficient_decrease_examples():
    f = half_sq()
    x, d = np.array([1.0, 0.0]), np.array([-1.0, 0.0])
    assert sufficient_decrease(f, x, d, 1.0, 1.0)
    assert not sufficient_decrease(f, x, d, 1.0, 0.5)
    assert sufficient_decrease(f, x, d, 0.0, 1e-9)


def test_backtrack_accepts_immediately_at_true_curvature():
    f = half_sq()
    x, d = np.array([1.0, 0.0]), np.array([-1.0, 0.0])
    out = backtrack(f, x, d, float(f.grad(x) @ d), NormId.L2, 1.0, 1.0, 2.0)
    assert (out.t, out.L_accepted, out.n_backtracks) == (1.0, 1.0, 0)


def test_backtrack_ladder_from_quarter():
    # ladder 0.25 -> 0.5 -> 1: with t clamped to 1 the condition reads 0 <= -1/2 + L/2, so L = 1 is the first pass
    f = half_sq()
    x, d = np.array([1.0, 0.0]), np.array([-1.0, 0.0])
    for L in (0.25, 0.5):
        assert not sufficient_decrease(f, x, d, 1.0, L)
    out = backtrack(f, x, d, -1.0, NormId.L2, 1.0, 0.25, 2.0)
    assert (out.t, out.L_accepted, out.n_backtracks) == (1.0, 1.0, 2)


def test_backtrack_zero_inner():
    f = half_sq()
    out = backtrack(f, np.zeros(2), np.array([1.0, 0.0]), 0.0, NormId.L2, 1.0, 0.3, 2.0)
    assert (out.t, out.n_backtracks) == (0.0, 0)


def test_backtrack_guard_against_broken_gradient():
    # the "gradient" has the wrong sign, so no L ever satisfies the test
    bad = Objective(1, lambda x: -float(x[0]), lambda x: np.ones(1))
    with pytest.raises(BacktrackingError):
        backtrack(bad, np.zeros(1), -np.ones(1), -1.0, NormId.L2, math.inf, 1.0, 2.0, max_rounds=20)


def test_backtrack_argument_checks():
    f = half_sq()
    with pytest.raises(ValueError):
        backtrack(f, np.ones(2), -np.ones(2), -2.0, NormId.L2, 1.0, 0.0)
    with pytest.raises(ValueError):
        backtrack(f, np.ones(2), -np.ones(2), -2.0, NormId.L2, 1.0, 1.0, beta=1.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 50), st.floats(1e-3, 100), st.sampled_from([1.0, math.inf]))
def test_backtrack_result_satisfies_condition_and_round_bound(seed, curvature, L_init, tmax):
    rng = np.random.default_rng(seed)
    n = 4
    Qm, _ = np.linalg.qr(rng.standard_normal((n, n)))
    H = (Qm * np.linspace(curvature / 10, curvature, n)) @ Qm.T
    L_true = float(np.linalg.eigvalsh(H)[-1])
    f = Objective(n, lambda x: 0.5 * float(x @ H @ x), lambda x: H @ x)
    x = rng.standard_normal(n)
    d = -f.grad(x)
    inner = float(f.grad(x) @ d)
    out = backtrack(f, x, d, inner, NormId.L2, tmax, L_init, 2.0)
    assert sufficient_decrease(f, x, d, out.t, out.L_accepted, NormId.L2)
    assert out.L_accepted <= max(L_init, 2.0 * (L_true + DELTA)) + 1e-9
    bound = max(0, math.ceil(math.log((L_true + DELTA) / L_init, 2.0))) + 1
    assert out.n_backtracks <= bound


# ---- gamma state machine


@pytest.mark.parametrize("backtracks, expected", [(0, 0.225), (11, 0.275), (5, 0.25)])
def test_update_gamma_examples(backtracks, expected):
    assert update_gamma(0.25, backtracks, 10) == pytest.approx(expected, rel=1e-15)


@given(st.floats(1e-6, 1e3), st.integers(0, 100), st.integers(1, 50))
def test_update_gamma_ratio(gamma, backtracks, r):
    new = update_gamma(gamma, backtracks, r)
    assert new in (0.9 * gamma, gamma, 1.1 * gamma)
    expected = 0.9 if backtracks == 0 else (1.1 if backtracks > r else 1.0)
    assert new == expected * gamma


# ---- strategy configuration


def test_strategy_defaults():
    s = StepStrategy()
    assert (s.gamma0, s.delta, s.beta, s.r) == (0.25, 1e-10, 2.0, 10)
    assert (s.eta_down, s.eta_up, s.pb_decrease) == (0.9, 1.1, 0.9)
    assert StepStrategy("short-step").tag is StrategyTag.SHORT_STEP


@pytest.mark.parametrize("kwargs", [dict(gamma0=0.0), dict(gamma0=1.5), dict(delta=0.0), dict(beta=1.0),
                                    dict(r=0), dict(pb_decrease=1.0)])
def test_strategy_validation(kwargs):
    with pytest.raises(ConfigurationError):
        StepStrategy(**kwargs)


def test_unknown_strategy_lists_valid_names():
    with pytest.raises(ValueError, match="adaptive-constant"):
        StepStrategy("nope")


# ---- next_step dispatch


def test_next_step_open_loop():
    f = half_sq()
    s = StepStrategy("open-loop")
    state = init_state(s, f, np.ones(2), f.grad(np.ones(2)))
    out, _ = next_step(s, state, f, np.ones(2), f.grad(np.ones(2)), -np.ones(2), NormId.L2, 1.0, 0)
    assert out.t == 1.0


def test_next_step_adaptive_constant_ladder():
    # exact curvature 1: estimate 1 + delta, scaled by 1/4, then two doublings to 1 + delta
    f = half_sq()
    s = StepStrategy("adaptive-constant")
    x_prev, x = np.array([3.0, -1.0]), np.array([1.0, 0.0])
    state = StepState(L_current=5.0, gamma_current=0.25, prev_x=x_prev, prev_grad=f.grad(x_prev))
    d = np.array([-1.0, 0.0])
    out, state = next_step(s, state, f, x, f.grad(x), d, NormId.L2, math.inf, 1)
    scaled = 0.25 * (1 + DELTA)
    assert out.n_backtracks == 2
    assert out.L_accepted == scaled * 4
    assert out.t == pytest.approx(1 / (1 + DELTA))
    assert state.L_current == out.L_accepted and state.prev_x is x


def test_next_step_pure_backtracking_decrease():
    f = half_sq(curvature=0.5)
    s = StepStrategy("pure-backtracking")
    x = np.array([1.0, 0.0])
    state = StepState(L_current=1.0, gamma_current=0.25)
    out, state = next_step(s, state, f, x, f.grad(x), np.array([-1.0, 0.0]), NormId.L2, math.inf, 0)
    assert out.L_accepted == 0.9 and out.n_backtracks == 0
    assert state.L_current == 0.9


def test_next_step_short_step_requires_L():
    f = Objective(2, lambda x: 0.5 * float(x @ x), lambda x: x)
    s = StepStrategy("short-step")
    state = init_state(s, f, np.ones(2), np.ones(2))
    with pytest.raises(ConfigurationError):
        next_step(s, state, f, np.ones(2), np.ones(2), -np.ones(2), NormId.L2, 1.0, 0)
    s2 = StepStrategy("short-step", global_L=2.0)
    out, _ = next_step(s2, state, f, np.ones(2), np.ones(2), -np.ones(2), NormId.L2, math.inf, 0)
    assert out.t == pytest.approx(2 / (2.0 * 2))


def test_adjustable_gamma_period_accounting():
    f = Objective(3, lambda x: float(np.sum(x)), lambda x: np.ones(3))  # linear: never backtracks
    s = StepStrategy("adaptive-adjustable", r=3)
    x = np.zeros(3)
    state = init_state(s, f, x, f.grad(x))
    gammas = []
    for k in range(9):
        d = -np.ones(3) / math.sqrt(3)
        out, state = next_step(s, state, f, x, f.grad(x), d, NormId.L2, 1.0, k)
        x = x + out.t * d
        gammas.append(state.gamma_current)
    assert gammas == [0.25, 0.25, 0.25 * 0.9, 0.25 * 0.9, 0.25 * 0.9, 0.25 * 0.9 * 0.9,
                      0.25 * 0.9 * 0.9, 0.25 * 0.9 * 0.9, 0.25 * 0.9 * 0.9 * 0.9]


def test_init_state_probe_is_seeded():
    f = half_sq(dim=5, curvature=2.0)
    s = StepStrategy()
    x0 = np.arange(5.0)
    a = init_state(s, f, x0, f.grad(x0), seed=3)
    b = init_state(s, f, x0, f.grad(x0), seed=3)
    assert np.array_equal(a.prev_x, b.prev_x) and a.L_current == b.L_current
    assert norm(NormId.L2, a.prev_x - x0) == pytest.approx(1e-6)
    assert a.L_current == pytest.approx(2.0, rel=1e-6)


def test_adjustable_gamma_is_capped_at_one():
    # an always-failing first trial backtracks on every step, so the raw rule would keep growing gamma
    H = np.diag([1.0, 1000.0])
    f = Objective(2, lambda x: 0.5 * float(x @ H @ x), lambda x: H @ x)
    s = StepStrategy("adaptive-adjustable", gamma0=0.9, r=1)
    state = StepState(L_current=1.0, gamma_current=0.9, prev_x=np.array([1.0, 0.0]), prev_grad=np.array([1.0, 0.0]))
    x = np.array([0.0, 1.0])
    for k in range(5):
        state.prev_x, state.prev_grad = np.array([x[0] + 1.0, x[1]]), H @ np.array([x[0] + 1.0, x[1]])
        out, state = next_step(s, state, f, x, f.grad(x), -f.grad(x) / np.linalg.norm(f.grad(x)), NormId.L2,
                               math.inf, k)
        assert state.gamma_current <= 1.0
    assert state.gamma_current == 1.0
