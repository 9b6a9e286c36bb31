"""Shared numeric types: vectors, norms and the objective abstraction."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class DimensionError(ValueError):
    """Vector lengths are empty or do not match."""


class NumericalError(ArithmeticError):
    """A NaN/Inf appeared, or an iterative routine failed to converge."""


class ConfigurationError(ValueError):
    """A solver or strategy was configured inconsistently."""


class CapabilityError(NotImplementedError):
    """The requested (region, norm) combination is not supported."""


def as_vector(x, name: str = "x") -> np.ndarray:
    """Return `x` as a finite 1-D float64 array (a copy is made only if needed)."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    elif v.ndim > 1:
        v = v.reshape(-1)
    if v.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(v)):
        raise NumericalError(f"{name} contains non-finite entries")
    return v


class NormId(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self) -> "NormId":
        return _DUAL[self]

    @classmethod
    def parse(cls, name: str) -> "NormId":
        try:
            return cls(name.lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown norm {name!r}; valid: {valid}") from None


_DUAL = {NormId.L1: NormId.LINF, NormId.L2: NormId.L2, NormId.LINF: NormId.L1}


def norm(p: NormId, x) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise DimensionError("norm of an empty vector")
    if p is NormId.L1:
        return float(np.sum(np.abs(x)))
    scale = float(np.max(np.abs(x)))
    if p is NormId.LINF or scale == 0.0:
        return scale
    y = x / scale  # rescaled so squares neither underflow nor overflow
    return scale * float(np.sqrt(np.dot(y, y)))


def dual_norm(p: NormId, x) -> float:
    """Dual norm ``max_{||z||_p <= 1} <x, z>``, i.e. the norm of ``p.dual``."""
    return norm(p.dual, x)


@dataclass(frozen=True)
class Objective:
    """Smooth objective with value and gradient oracles.

    Matrices are passed around flattened in row-major order; `shape` records
    the (rows, cols) layout when the variable is a matrix.
    """

    dim: int
    value_fn: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    known_lipschitz: Optional[float] = None
    known_optimum: Optional[float] = None
    name: str = "objective"
    shape: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError("objective dimension must be positive")
        if self.known_lipschitz is not None and not self.known_lipschitz > 0:
            raise ConfigurationError("known_lipschitz must be positive")

    def value(self, x: np.ndarray) -> float:
        fx = float(self.value_fn(x))
        if not np.isfinite(fx):
            raise NumericalError(f"{self.name}: objective value is {fx}")
        return fx

    def grad(self, x: np.ndarray) -> np.ndarray:
        g = np.asarray(self.grad_fn(x), dtype=np.float64).reshape(-1)
        if g.size != self.dim:
            raise DimensionError(f"{self.name}: gradient has length {g.size}, expected {self.dim}")
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"{self.name}: gradient has non-finite entries")
        return g


class CountingObjective:
    """Wraps an Objective and counts value/gradient evaluations."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.fn_evals = 0
        self.grad_evals = 0

    def __getattr__(self, item):
        return getattr(self.objective, item)

    def value(self, x):
        self.fn_evals += 1
        return self.objective.value(x)

    def grad(self, x):
        self.grad_evals += 1
        return self.objective.grad(x)


def finite_diff_gradient(obj: Objective, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient, one coordinate at a time."""
    if not h > 0:
        raise ValueError("step h must be positive")
    x = as_vector(x)
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(x.size):
        e[i] = h
        g[i] = (obj.value(x + e) - obj.value(x - e)) / (2.0 * h)
        e[i] = 0.0
    return g


def gradient_error(obj: Objective, x, h: float = 1e-6) -> float:
    """``||grad - fd||_inf / max(||grad||_inf, 1)`` against central differences."""
    x = as_vector(x)
    g = obj.grad(x)
    fd = finite_diff_gradient(obj, x, h)
    return float(np.max(np.abs(g - fd)) / max(float(np.max(np.abs(g))), 1.0))
