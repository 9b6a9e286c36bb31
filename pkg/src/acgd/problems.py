"""Benchmark objectives: synthetic generators and a LIBSVM reader.

Every builder returns plain :class:`~acgd.core.Objective` instances whose
gradients are written out analytically. :func:`build_problem` bundles an
objective with its default feasible region and starting point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import expit, log_expit

from .core import Objective
from .lmo import Region, top_singular_pair
from .solver import Mode


class DataError(ValueError):
    pass


class LibsvmParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class SyntheticSpec:
    m: int = 200
    n: int = 1000
    tau: float = 10.0
    seed: int = 0
    density: Optional[float] = None


@dataclass
class SparseDataset:
    rows: int
    cols: int
    entries: list[tuple[int, int, float]]  # zero-based (row, col, value)
    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.labels.size != self.rows:
            raise DataError(f"{self.labels.size} labels for {self.rows} rows")
        for i, j, _ in self.entries:
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise DataError(f"entry ({i}, {j}) out of range")

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.rows, self.cols))
        for i, j, val in self.entries:
            A[i, j] = val
        return A


@dataclass
class Problem:
    """An objective with its default region, start point and mode."""

    objective: Objective
    region: Optional[Region]
    x0: np.ndarray
    mode: Mode
    info: dict = field(default_factory=dict)


def _lambda_max_gram(A: np.ndarray) -> float:
    """Largest eigenvalue of A^T A, by power iteration."""
    return top_singular_pair(A).sigma ** 2


# ---------------------------------------------------------------- least squares


def _least_squares_objective(A, b, name, **kw) -> Objective:
    def value(x):
        r = b - A @ x
        return float(r @ r)

    def grad(x):
        return -2.0 * (A.T @ (b - A @ x))

    return Objective(A.shape[1], value, grad, known_lipschitz=2.0 * _lambda_max_gram(A), name=name, **kw)


LASSO_MAX_L1_FRACTION = 0.75


def lasso_data(spec: SyntheticSpec):
    """Seeded ``(A, b, x_true)`` for :func:`make_lasso`.

    `x_true` has ``round(tau)`` Gaussian nonzeros and is shrunk when needed so
    that ``||x_true||_1 <= LASSO_MAX_L1_FRACTION * tau``; the zero-residual
    optimum then lies strictly inside the l1 ball.
    """
    rng = np.random.default_rng(spec.seed)
    A = rng.standard_normal((spec.m, spec.n))
    k = min(spec.n, max(1, int(round(spec.tau))))
    x_true = np.zeros(spec.n)
    x_true[rng.choice(spec.n, size=k, replace=False)] = rng.standard_normal(k)
    l1 = np.sum(np.abs(x_true))
    if l1 > LASSO_MAX_L1_FRACTION * spec.tau:
        x_true *= LASSO_MAX_L1_FRACTION * spec.tau / l1
    return A, A @ x_true, x_true


def make_lasso(spec: SyntheticSpec):
    """``||b - A x||^2`` over the l1 ball of radius tau, with ``b = A x_true``.

    Returns ``(objective, region, x_true)``.
    """
    A, b, x_true = lasso_data(spec)
    obj = _least_squares_objective(A, b, "lasso", known_optimum=0.0)
    return obj, Region.l1_ball(spec.tau, spec.n), x_true


def make_least_squares(spec: SyntheticSpec, noise: float = 0.1):
    """Unconstrained ``||b - A x||^2``; `known_optimum` is the residual of the
    dense least-squares solution. With ``noise=0`` the system is consistent."""
    rng = np.random.default_rng(spec.seed)
    A = rng.standard_normal((spec.m, spec.n))
    x_true = rng.standard_normal(spec.n)
    b = A @ x_true + noise * rng.standard_normal(spec.m)
    x_ls, *_ = np.linalg.lstsq(A, b, rcond=None)
    r = b - A @ x_ls
    f_star = float(r @ r) if noise else 0.0
    return _least_squares_objective(A, b, "least-squares", known_optimum=f_star)


# ---------------------------------------------------------------- matrix balancing


def balancing_matrix(n: int, density: float = 5.0, seed: int = 0) -> np.ndarray:
    """Sparse nonnegative symmetric matrix ``|B + B^T| + 0.05 I`` with about
    `density` uniform nonzeros per row of B."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density / n
    B = np.where(mask, rng.random((n, n)), 0.0)
    return np.abs(B + B.T) + 0.05 * np.eye(n)


def make_matrix_balancing(n: int = 100, a: float = 1.0, b: float = 10.0, density: float = 5.0, seed: int = 0,
                          A: Optional[np.ndarray] = None):
    """``sum_ij A_ij exp(x_i - x_j)`` over the box ``[a, b]^n``.

    For symmetric A the minimum is ``sum(A)``, attained at any constant vector.
    """
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    if A is None:
        A = balancing_matrix(n, density, seed)
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]

    def weighted(x):
        return A * np.exp(x[:, None] - x[None, :])

    def value(x):
        return float(np.sum(weighted(x)))

    def grad(x):
        W = weighted(x)
        return W.sum(axis=1) - W.sum(axis=0)

    f_star = float(np.sum(A)) if np.allclose(A, A.T) else None
    obj = Objective(n, value, grad, known_optimum=f_star, name="matrix-balancing")
    return obj, Region.box(np.full(n, a), np.full(n, b))


# ---------------------------------------------------------------- classification


def synthetic_classification(m: int = 400, n: int = 60, density: float = 0.1, seed: int = 0) -> SparseDataset:
    """Binary-feature dataset with +-1 labels from a planted linear model,
    shaped like the a1a benchmark (sparse 0/1 features)."""
    rng = np.random.default_rng(seed)
    X = (rng.random((m, n)) < density).astype(float)
    w = rng.standard_normal(n)
    scores = X @ w + 0.5 * rng.standard_normal(m)
    y = np.where(scores > np.median(scores), 1.0, -1.0)
    ii, jj = np.nonzero(X)
    return SparseDataset(m, n, [(int(i), int(j), 1.0) for i, j in zip(ii, jj)], y)


def make_logistic(dataset: SparseDataset, tau: float):
    """Mean logistic loss over the l1 ball; ``L = sigma_max(A)^2 / (4 m)``."""
    y = dataset.labels
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise DataError("logistic regression needs labels in {-1, +1}")
    A = dataset.to_dense()
    m = dataset.rows

    def value(x):
        return float(-np.mean(log_expit(y * (A @ x))))

    def grad(x):
        return -(A.T @ (y * expit(-y * (A @ x)))) / m

    L = _lambda_max_gram(A) / (4.0 * m)
    obj = Objective(dataset.cols, value, grad, known_lipschitz=L if L > 0 else None, name="logistic")
    return obj, Region.l1_ball(tau, dataset.cols)


def make_sigmoid_ls(dataset: SparseDataset, tau: Optional[float] = None):
    """Mean squared sigmoid residual; labels -1 are mapped to 0.

    Returns ``(objective, region)`` with an l1 ball when `tau` is given and
    ``region=None`` otherwise.
    """
    y = np.where(dataset.labels < 0, 0.0, dataset.labels)
    A = dataset.to_dense()
    m = dataset.rows

    def value(x):
        r = y - expit(A @ x)
        return float(r @ r) / m

    def grad(x):
        s = expit(A @ x)
        return A.T @ (-2.0 * (y - s) * s * (1.0 - s)) / m

    obj = Objective(dataset.cols, value, grad, name="sigmoid-ls")
    return obj, (Region.l1_ball(tau, dataset.cols) if tau is not None else None)


# ---------------------------------------------------------------- quadratics


def random_indefinite_q(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    return (G + G.T) / 2.0


def make_simplex_qp(Q):
    """``x^T Q x`` over the unit simplex (Q is symmetrized)."""
    Q = np.asarray(Q, dtype=np.float64)
    Q = (Q + Q.T) / 2.0
    n = Q.shape[0]
    sigma = top_singular_pair(Q).sigma
    obj = Objective(n, lambda x: float(x @ Q @ x), lambda x: 2.0 * (Q @ x),
                    known_lipschitz=2.0 * sigma if sigma > 0 else None, name="simplex-qp")
    return obj, Region.simplex(1.0, n)


def spd_matrix(n: int, cond: float, seed: int = 0) -> np.ndarray:
    """Random symmetric matrix with eigenvalues evenly spaced on ``[1, cond]``."""
    rng = np.random.default_rng(seed)
    Qm, _ = np.linalg.qr(rng.standard_normal((n, n)))
    H = (Qm * np.linspace(1.0, cond, n)) @ Qm.T
    return (H + H.T) / 2.0


def make_strongly_convex_quadratic(n: int = 20, cond: float = 10.0, seed: int = 0):
    """``x^T H x / 2`` with spectrum in ``[1, cond]``; minimum 0 at the origin.

    Returns ``(objective, mu, L)``.
    """
    H = spd_matrix(n, cond, seed)
    obj = Objective(n, lambda x: 0.5 * float(x @ H @ x), lambda x: H @ x,
                    known_lipschitz=float(cond), known_optimum=0.0, name="quadratic")
    return obj, 1.0, float(cond)


# ---------------------------------------------------------------- test functions


def make_rosenbrock(n: int) -> Objective:
    if n < 2:
        raise ValueError("n >= 2 required")

    def value(x):
        return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (x[:-1] - 1.0) ** 2))

    def grad(x):
        g = np.zeros_like(x)
        inner = x[1:] - x[:-1] ** 2
        g[:-1] = -400.0 * x[:-1] * inner + 2.0 * (x[:-1] - 1.0)
        g[1:] += 200.0 * inner
        return g

    return Objective(n, value, grad, known_optimum=0.0, name="rosenbrock")


def make_levy(n: int) -> Objective:
    if n < 2:
        raise ValueError("n >= 2 required")
    pi = math.pi

    def value(x):
        w = 1.0 + (x - 1.0) / 4.0
        head = np.sin(pi * w[0]) ** 2
        mid = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(pi * w[1:]) ** 2))
        tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * pi * w[-1]) ** 2)
        return float(head + mid + tail)

    def grad(x):
        w = 1.0 + (x - 1.0) / 4.0
        gw = np.zeros_like(w)
        gw[0] += 2.0 * pi * np.sin(pi * w[0]) * np.cos(pi * w[0])
        s2 = np.sin(pi * w[1:]) ** 2
        gw[:-1] += 2.0 * (w[:-1] - 1.0) * (1.0 + 10.0 * s2)
        gw[1:] += (w[:-1] - 1.0) ** 2 * 10.0 * pi * np.sin(2.0 * pi * w[1:])
        wn = w[-1]
        gw[-1] += 2.0 * (wn - 1.0) * (1.0 + np.sin(2.0 * pi * wn) ** 2)
        gw[-1] += (wn - 1.0) ** 2 * 2.0 * pi * np.sin(4.0 * pi * wn)
        return gw / 4.0

    return Objective(n, value, grad, known_optimum=0.0, name="levy")


def make_zakharov(n: int) -> Objective:
    if n < 2:
        raise ValueError("n >= 2 required")
    half_idx = 0.5 * np.arange(1, n + 1)

    def value(x):
        s = float(half_idx @ x)
        return float(x @ x) + s ** 2 + s ** 4

    def grad(x):
        s = float(half_idx @ x)
        return 2.0 * x + (2.0 * s + 4.0 * s ** 3) * half_idx

    return Objective(n, value, grad, known_optimum=0.0, name="zakharov")


def make_sum_of_squares(n: int) -> Objective:
    """``(x_1 - 3)^2 + sum_{i>=2} (x_1 - 3 - 2 (x_1 + ... + x_i)^2)^2``."""
    if n < 2:
        raise ValueError("n >= 2 required")

    def residuals(x):
        S = np.cumsum(x)[1:]
        return x[0] - 3.0 - 2.0 * S ** 2, S

    def value(x):
        r, _ = residuals(x)
        return float((x[0] - 3.0) ** 2 + r @ r)

    def grad(x):
        r, S = residuals(x)
        rs = r * S  # term i >= 2 contributes -8 r_i S_i to every x_j with j <= i
        tail = np.cumsum(rs[::-1])[::-1]
        g = np.empty_like(x)
        g[1:] = -8.0 * tail
        g[0] = 2.0 * (x[0] - 3.0) + 2.0 * np.sum(r) - 8.0 * tail[0]
        return g

    return Objective(n, value, grad, name="sum-of-squares")


# ---------------------------------------------------------------- matrix completion


def huber(alpha, rho):
    a = np.abs(alpha)
    return np.where(a <= rho, 0.5 * alpha ** 2, rho * (a - 0.5 * rho))


def huber_deriv(alpha, rho):
    return np.clip(alpha, -rho, rho)


def make_huber_completion(m: int = 30, n: int = 20, frac_observed: float = 0.3, rho: float = 1.0,
                          tau: float = 50.0, seed: int = 0, rank: int = 3, noise: float = 0.5):
    """Huber-loss matrix completion over the nuclear-norm ball.

    Observations come from a seeded rank-`rank` matrix plus Gaussian noise;
    the variable is the row-major flattening of an ``m x n`` matrix.
    """
    if not 0 < frac_observed <= 1:
        raise ValueError("frac_observed must lie in (0, 1]")
    if not rho > 0:
        raise ValueError("rho must be positive")
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n)) + noise * rng.standard_normal((m, n))
    mask = rng.random((m, n)) < frac_observed
    if not mask.any():
        mask[0, 0] = True
    obs = np.flatnonzero(mask.reshape(-1))
    y_obs = Y.reshape(-1)[obs]
    count = obs.size

    def value(x):
        return float(np.sum(huber(y_obs - x[obs], rho))) / count

    def grad(x):
        g = np.zeros_like(x)
        g[obs] = -huber_deriv(y_obs - x[obs], rho) / count
        return g

    obj = Objective(m * n, value, grad, known_lipschitz=1.0 / count, name="huber-completion", shape=(m, n))
    return obj, Region.nuclear_ball(tau, m, n)


# ---------------------------------------------------------------- LIBSVM


def load_libsvm(path, n_features: Optional[int] = None) -> SparseDataset:
    """Read ``label idx:val idx:val ...`` lines with 1-based strictly ascending indices."""
    labels: list[float] = []
    entries: list[tuple[int, int, float]] = []
    max_idx = 0
    with open(Path(path)) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise DataError(f"line {lineno}: non-numeric label {tokens[0]!r}") from None
            row = len(labels)
            labels.append(label)
            prev = 0
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise LibsvmParseError(lineno, f"expected idx:val, got {tok!r}")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise LibsvmParseError(lineno, f"bad feature {tok!r}") from None
                if idx < 1:
                    raise LibsvmParseError(lineno, f"feature index {idx} is not 1-based")
                if idx == prev:
                    raise LibsvmParseError(lineno, f"duplicate feature index {idx}")
                if idx < prev:
                    raise LibsvmParseError(lineno, f"feature index {idx} after {prev} (indices must ascend)")
                prev = idx
                max_idx = max(max_idx, idx)
                entries.append((row, idx - 1, val))
    cols = max_idx if n_features is None else n_features
    if max_idx > cols:
        raise DataError(f"feature index {max_idx} exceeds n_features={cols}")
    return SparseDataset(len(labels), cols, entries, np.array(labels))


# ---------------------------------------------------------------- registry

PROBLEM_NAMES = (
    "lasso", "least-squares", "matrix-balancing", "logistic", "sigmoid-ls", "simplex-qp", "quadratic",
    "sum-of-squares", "rosenbrock", "levy", "zakharov", "huber-completion",
)


def build_problem(name: str, m: Optional[int] = None, n: Optional[int] = None, tau: Optional[float] = None,
                  seed: int = 0, data: Optional[str] = None) -> Problem:
    """Desk-scale instance of a named benchmark with its default start point.

    `tau` is the region radius for constrained problems; ``data`` points to a
    LIBSVM file for the classification problems (synthetic data otherwise).
    """
    rng = np.random.default_rng(seed + 7919)
    if name == "lasso":
        obj, region, x_true = make_lasso(SyntheticSpec(m or 200, n or 1000, tau or 10.0, seed))
        return Problem(obj, region, np.zeros(obj.dim), Mode.CONSTRAINED, {"x_true": x_true})
    if name == "least-squares":
        obj = make_least_squares(SyntheticSpec(m or 400, n or 100, 1.0, seed))
        return Problem(obj, None, np.zeros(obj.dim), Mode.UNCONSTRAINED)
    if name == "matrix-balancing":
        obj, region = make_matrix_balancing(n or 100, 1.0, 10.0, 5.0, seed)
        return Problem(obj, region, rng.uniform(1.0, 10.0, obj.dim), Mode.CONSTRAINED)
    if name in ("logistic", "sigmoid-ls"):
        ds = load_libsvm(data) if data else synthetic_classification(m or 400, n or 60, 0.1, seed)
        if name == "logistic":
            obj, region = make_logistic(ds, tau or 10.0)
            return Problem(obj, region, np.zeros(obj.dim), Mode.CONSTRAINED)
        obj, region = make_sigmoid_ls(ds, tau)
        mode = Mode.CONSTRAINED if region is not None else Mode.UNCONSTRAINED
        return Problem(obj, region, np.zeros(obj.dim), mode)
    if name == "simplex-qp":
        Q = random_indefinite_q(n or 100, seed)
        obj, region = make_simplex_qp(Q)
        return Problem(obj, region, np.full(obj.dim, 1.0 / obj.dim), Mode.CONSTRAINED, {"Q": (Q + Q.T) / 2.0})
    if name == "quadratic":
        obj, mu, L = make_strongly_convex_quadratic(n or 20, 10.0, seed)
        return Problem(obj, None, rng.standard_normal(obj.dim), Mode.UNCONSTRAINED, {"mu": mu, "L": L})
    if name == "huber-completion":
        obj, region = make_huber_completion(m or 30, n or 20, 0.3, 1.0, tau or 50.0, seed)
        return Problem(obj, region, np.zeros(obj.dim), Mode.CONSTRAINED)
    builders = {"sum-of-squares": make_sum_of_squares, "rosenbrock": make_rosenbrock,
                "levy": make_levy, "zakharov": make_zakharov}
    if name in builders:
        dim = n or 100
        obj = builders[name](dim)
        x0 = {"sum-of-squares": np.zeros(dim), "rosenbrock": np.zeros(dim),
              "levy": rng.uniform(-5.0, 5.0, dim), "zakharov": np.ones(dim)}[name]
        return Problem(obj, None, x0, Mode.UNCONSTRAINED)
    raise ValueError(f"unknown problem {name!r}; valid: {', '.join(PROBLEM_NAMES)}")
