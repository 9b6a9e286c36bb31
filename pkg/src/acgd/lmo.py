"""Linear minimization oracles over norm balls, the simplex, boxes and matrix balls."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import svds

from .core import CapabilityError, DimensionError, NormId, NumericalError, as_vector


class RegionKind(enum.Enum):
    L2_BALL = "l2"
    L1_BALL = "l1"
    LINF_BALL = "linf"
    SIMPLEX = "simplex"
    BOX = "box"
    NUCLEAR_BALL = "nuclear"
    SPECTRAL_BALL = "spectral"


_MATRIX_KINDS = (RegionKind.NUCLEAR_BALL, RegionKind.SPECTRAL_BALL)


@dataclass(frozen=True, eq=False)
class Region:
    """Compact convex feasible set.

    Boxes store their actual per-coordinate bounds ``lower <= v <= upper``;
    use :meth:`box_from_radii` for the ``-l <= v <= u`` parametrization.
    Vector balls and the simplex accept any dimension unless `dim` is set.
    """

    kind: RegionKind
    tau: float = 1.0
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    rows: Optional[int] = None
    cols: Optional[int] = None
    dim: Optional[int] = None

    def __post_init__(self):
        if self.kind is RegionKind.BOX:
            if self.lower is None or self.upper is None:
                raise ValueError("box needs lower and upper bounds")
            lo = as_vector(self.lower, "lower")
            hi = as_vector(self.upper, "upper")
            if lo.shape != hi.shape:
                raise DimensionError("box bounds have different lengths")
            if np.any(lo > hi):
                raise ValueError("box is empty: lower > upper somewhere")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
            object.__setattr__(self, "dim", lo.size)
            return
        if not (self.tau > 0 and np.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.kind in _MATRIX_KINDS:
            if not (self.rows and self.cols and self.rows > 0 and self.cols > 0):
                raise ValueError("matrix balls need positive rows and cols")
            object.__setattr__(self, "dim", self.rows * self.cols)

    # constructors -------------------------------------------------------

    @classmethod
    def l2_ball(cls, tau=1.0, dim=None):
        return cls(RegionKind.L2_BALL, tau=float(tau), dim=dim)

    @classmethod
    def l1_ball(cls, tau=1.0, dim=None):
        return cls(RegionKind.L1_BALL, tau=float(tau), dim=dim)

    @classmethod
    def linf_ball(cls, tau=1.0, dim=None):
        return cls(RegionKind.LINF_BALL, tau=float(tau), dim=dim)

    @classmethod
    def simplex(cls, tau=1.0, dim=None):
        return cls(RegionKind.SIMPLEX, tau=float(tau), dim=dim)

    @classmethod
    def box(cls, lower, upper):
        return cls(RegionKind.BOX, lower=lower, upper=upper)

    @classmethod
    def box_from_radii(cls, l, u):
        """The box ``{v : -l_i <= v_i <= u_i}``."""
        return cls(RegionKind.BOX, lower=-as_vector(l, "l"), upper=as_vector(u, "u"))

    @classmethod
    def nuclear_ball(cls, tau, rows, cols):
        return cls(RegionKind.NUCLEAR_BALL, tau=float(tau), rows=int(rows), cols=int(cols))

    @classmethod
    def spectral_ball(cls, tau, rows, cols):
        return cls(RegionKind.SPECTRAL_BALL, tau=float(tau), rows=int(rows), cols=int(cols))

    @classmethod
    def unit_ball(cls, p: NormId, dim=None):
        return {NormId.L1: cls.l1_ball, NormId.L2: cls.l2_ball, NormId.LINF: cls.linf_ball}[p](1.0, dim)

    # ------------------------------------------------------------------

    def check_dim(self, x: np.ndarray) -> None:
        if self.dim is not None and x.size != self.dim:
            raise DimensionError(f"{self.kind.value} region has dimension {self.dim}, got vector of length {x.size}")

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = as_vector(x)
        self.check_dim(x)
        k = self.kind
        if k is RegionKind.L2_BALL:
            return np.linalg.norm(x) <= self.tau + tol
        if k is RegionKind.L1_BALL:
            return np.sum(np.abs(x)) <= self.tau + tol
        if k is RegionKind.LINF_BALL:
            return np.max(np.abs(x)) <= self.tau + tol
        if k is RegionKind.SIMPLEX:
            return bool(np.all(x >= -tol) and abs(np.sum(x) - self.tau) <= tol)
        if k is RegionKind.BOX:
            return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))
        s = np.linalg.svd(x.reshape(self.rows, self.cols), compute_uv=False)
        if k is RegionKind.NUCLEAR_BALL:
            return np.sum(s) <= self.tau + tol
        return s[0] <= self.tau + tol

    def describe(self) -> str:
        if self.kind is RegionKind.BOX:
            return f"box[{self.dim}]"
        if self.kind in _MATRIX_KINDS:
            return f"{self.kind.value}(tau={self.tau:g}, {self.rows}x{self.cols})"
        return f"{self.kind.value}(tau={self.tau:g})"


@dataclass(frozen=True)
class SingularPair:
    sigma: float
    u: np.ndarray
    v: np.ndarray


def top_singular_pair(X, tol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> SingularPair:
    """Largest singular value and unit singular vectors by power iteration on X^T X.

    Stops once the relative change of the singular value estimate is below
    `tol`, so sigma (and hence the oracle value) is accurate to about `tol`
    while the vectors are accurate to about ``sqrt(tol)``. The start vector
    is drawn from a fixed-seed generator so repeated calls are bit-identical.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError("top_singular_pair expects a 2-D array")
    if not tol > 0 or max_iter < 1:
        raise ValueError("need tol > 0 and max_iter >= 1")
    m, n = X.shape
    scale = float(np.max(np.abs(X))) if X.size else 0.0
    if scale == 0.0:
        u = np.zeros(m)
        v = np.zeros(n)
        u[0] = v[0] = 1.0
        return SingularPair(0.0, u, v)
    X = X / scale  # keeps squared norms away from underflow and overflow

    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    w = X @ v
    sigma = np.linalg.norm(w)
    if sigma == 0.0:
        # start vector landed in the null space; restart from the largest row,
        # for which (X v)_i = ||X_i||^2 > 0
        v = X[np.argmax(np.linalg.norm(X, axis=1))].copy()
        v /= np.linalg.norm(v)
        w = X @ v
        sigma = np.linalg.norm(w)
    for _ in range(max_iter):
        u = w / sigma
        z = X.T @ u
        v = z / np.linalg.norm(z)
        w = X @ v
        new_sigma = np.linalg.norm(w)
        if abs(new_sigma - sigma) <= tol * new_sigma:
            return SingularPair(float(new_sigma * scale), w / new_sigma, v)
        sigma = new_sigma
    raise NumericalError(f"power iteration did not converge in {max_iter} iterations")


POWER_ITER_BUDGET = 100
NUCLEAR_LMO_TOL = 1e-14  # oracle value relative accuracy; near the rounding floor of the sigma estimate


def lanczos_top_singular_pair(X, tol: float = 1e-10, seed: int = 0) -> SingularPair:
    """Leading singular triplet via ARPACK (Lanczos); robust to tiny spectral gaps."""
    X = np.asarray(X, dtype=np.float64)
    m, n = X.shape
    if min(m, n) == 1:
        # a single row or column is its own singular vector
        vec = X.reshape(-1)
        sigma = float(np.linalg.norm(vec))
        if sigma == 0.0:
            return top_singular_pair(X)
        if m == 1:
            return SingularPair(sigma, np.ones(1), vec / sigma)
        return SingularPair(sigma, vec / sigma, np.ones(1))
    v0 = np.random.default_rng(seed).standard_normal(min(m, n))
    U, S, Vt = svds(X, k=1, tol=tol, v0=v0)
    return SingularPair(float(S[0]), U[:, 0], Vt[0])


def leading_singular_pair(X, tol: float = 1e-10, seed: int = 0) -> SingularPair:
    """Power iteration with a short budget, then Lanczos if the gap is too small for it."""
    try:
        return top_singular_pair(X, tol=tol, max_iter=POWER_ITER_BUDGET, seed=seed)
    except NumericalError:
        return lanczos_top_singular_pair(X, tol=tol, seed=seed)


def _sign(x):
    return np.sign(x)  # sign(0) = 0


def lmo(region: Region, x) -> np.ndarray:
    """A minimizer of ``<x, v>`` over `region`; ties go to the lowest index."""
    x = as_vector(x)
    region.check_dim(x)
    tau = region.tau
    k = region.kind
    if k is RegionKind.L2_BALL:
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return np.zeros_like(x)
        return -tau * x / nx
    if k is RegionKind.L1_BALL:
        j = int(np.argmax(np.abs(x)))
        v = np.zeros_like(x)
        v[j] = -tau * (_sign(x[j]) if x[j] != 0 else 1.0)
        return v
    if k is RegionKind.SIMPLEX:
        v = np.zeros_like(x)
        v[int(np.argmin(x))] = tau
        return v
    if k is RegionKind.LINF_BALL:
        return -tau * _sign(x)
    if k is RegionKind.BOX:
        at_zero = np.clip(0.0, region.lower, region.upper)
        return np.where(x > 0, region.lower, np.where(x < 0, region.upper, at_zero))
    X = x.reshape(region.rows, region.cols)
    if k is RegionKind.NUCLEAR_BALL:
        pair = leading_singular_pair(X, tol=NUCLEAR_LMO_TOL)
        return (-tau * np.outer(pair.u, pair.v)).reshape(-1)
    U, _, Vt = np.linalg.svd(X, full_matrices=False)
    return (-tau * (U @ Vt)).reshape(-1)


def brute_force_lmo(region: Region, x, n_samples: int = 1000, seed: int = 0) -> float:
    """Reference minimum of ``<x, v>`` over `region` for testing :func:`lmo`.

    Polytopes enumerate every vertex (boxes and the l-inf ball are limited to
    20 coordinates). Curved sets take the minimum over `n_samples` seeded
    feasible points together with analytic candidates obtained independently
    of :func:`lmo` (Cauchy-Schwarz for the l2 ball, LAPACK SVD for matrices).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    x = as_vector(x)
    region.check_dim(x)
    n = x.size
    tau = region.tau
    k = region.kind
    rng = np.random.default_rng(seed)

    if k is RegionKind.L1_BALL:
        verts = np.vstack([tau * np.eye(n), -tau * np.eye(n)])
        return float(np.min(verts @ x))
    if k is RegionKind.SIMPLEX:
        return float(np.min(tau * np.eye(n) @ x))
    if k in (RegionKind.LINF_BALL, RegionKind.BOX):
        if n > 20:
            raise ValueError("vertex enumeration limited to 20 coordinates")
        if k is RegionKind.LINF_BALL:
            lo, hi = -tau * np.ones(n), tau * np.ones(n)
        else:
            lo, hi = region.lower, region.upper
        best = np.inf
        for choice in itertools.product((0, 1), repeat=n):
            c = np.where(np.array(choice, dtype=bool), hi, lo)
            best = min(best, float(c @ x))
        return best
    if k is RegionKind.L2_BALL:
        pts = rng.standard_normal((n_samples, n))
        pts *= tau / np.linalg.norm(pts, axis=1, keepdims=True)
        pts = np.vstack([pts, tau * np.eye(n), -tau * np.eye(n)])
        best = float(np.min(pts @ x))
        return min(best, -tau * float(np.sqrt(x @ x)))

    X = x.reshape(region.rows, region.cols)
    r, c = X.shape
    best = np.inf
    if k is RegionKind.NUCLEAR_BALL:
        for i, j in itertools.product(range(r), range(c)):
            best = min(best, -tau * abs(X[i, j]))
        a = rng.standard_normal((n_samples, r))
        b = rng.standard_normal((n_samples, c))
        vals = tau * np.einsum("ki,ij,kj->k", a, X, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        best = min(best, float(np.min(vals)), float(np.min(-vals)))
        U, s, Vt = np.linalg.svd(X)
        best = min(best, float(-tau * U[:, 0] @ X @ Vt[0]))
        return float(best)
    # spectral ball: orthogonal-column samples plus -tau * nuclear norm
    Q1, _ = np.linalg.qr(rng.standard_normal((n_samples, r, min(r, c))))
    Q2, _ = np.linalg.qr(rng.standard_normal((n_samples, c, min(r, c))))
    vals = tau * np.einsum("ij,kil,kjl->k", X, Q1, Q2)  # <X, Q1 Q2^T> per sample
    best = min(best, float(np.min(vals)), float(np.min(-vals)))
    # the symmetric dilation [[0, X], [X^T, 0]] has eigenvalues +-sigma_i
    dilation = np.block([[np.zeros((r, r)), X], [X.T, np.zeros((c, c))]])
    nuclear = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(dilation))))
    return float(min(best, -tau * nuclear))


def diameter(region: Region, p: NormId) -> float:
    """Diameter ``max ||x - y||_p`` over the region (Frobenius for matrix balls)."""
    k = region.kind
    tau = region.tau
    n = region.dim
    if k in _MATRIX_KINDS:
        if p is not NormId.L2:
            raise CapabilityError("matrix balls only support the Frobenius (L2) diameter")
        if k is RegionKind.NUCLEAR_BALL:
            return 2.0 * tau
        return 2.0 * tau * np.sqrt(min(region.rows, region.cols))
    if k is RegionKind.BOX:
        w = region.upper - region.lower
        return {NormId.L1: float(np.sum(w)), NormId.L2: float(np.linalg.norm(w)), NormId.LINF: float(np.max(w))}[p]
    if k is RegionKind.L1_BALL:
        return 2.0 * tau
    if k is RegionKind.SIMPLEX:
        if p is NormId.L1:
            return 2.0 * tau
        if p is NormId.L2:
            return np.sqrt(2.0) * tau
        return tau
    # l2 / linf balls: same-norm diameters need no dimension
    if (k is RegionKind.L2_BALL and p is NormId.L2) or (k is RegionKind.LINF_BALL and p is NormId.LINF):
        return 2.0 * tau
    if k is RegionKind.L2_BALL and p is NormId.LINF:
        return 2.0 * tau
    if n is None:
        raise CapabilityError(f"{k.value} diameter in {p.value} needs the region dimension")
    if k is RegionKind.L2_BALL:  # p == L1
        return 2.0 * tau * np.sqrt(n)
    return 2.0 * tau * (n if p is NormId.L1 else np.sqrt(n))
