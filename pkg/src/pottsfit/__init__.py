"""Jump-penalized least squares (Potts) segmentation of 1-D signals."""

from .potts import Segmentation, SolutionPath, brute_force_fit, fit_gamma, fit_k, interpolate, solve_path
from .stepfn import Interval, StepFunction, embed

__version__ = "0.1.0"

__all__ = [
    "Interval",
    "Segmentation",
    "SolutionPath",
    "StepFunction",
    "brute_force_fit",
    "embed",
    "fit_gamma",
    "fit_k",
    "interpolate",
    "solve_path",
]
