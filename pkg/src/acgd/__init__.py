"""Conditional gradient and normalized steepest descent with adaptive step sizes."""

from .core import (CapabilityError, ConfigurationError, DimensionError, NormId, NumericalError, Objective,
                   dual_norm, norm)
from .lmo import Region, RegionKind, diameter, top_singular_pair
from .solver import Mode, SolverConfig, SolverResult, Status, solve
from .stepsize import StepStrategy, StrategyTag

__all__ = [
    "CapabilityError", "ConfigurationError", "DimensionError", "NormId", "NumericalError", "Objective",
    "dual_norm", "norm", "Region", "RegionKind", "diameter", "top_singular_pair", "Mode",
    "SolverConfig", "SolverResult", "Status", "solve", "StepStrategy", "StrategyTag",
]
