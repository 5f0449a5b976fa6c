"""Data-driven choice of the jump penalty.

Two rules are provided: the log rule ``gamma = C * sigma**2 * log(n) / n``
and the multiresolution (MR) rule, which takes the largest gamma whose fit
leaves no interval with a normalized residual sum above
``(1 + delta) * sigma * sqrt(2 log n)``.  ``log`` is the natural logarithm.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from . import _kernels
from .potts import Segmentation, default_k_max, fit_gamma, gamma_walk, interpolate
from .stepfn import as_signal

__all__ = [
    "SelectionConfig",
    "CnReport",
    "MRCheck",
    "MRSelection",
    "estimate_sigma",
    "log_penalty",
    "fit_log_rule",
    "mr_check",
    "mr_select",
    "cn_statistic",
]

MAD_TO_SIGMA = 0.674489750196082  # standard normal 0.75 quantile


@dataclass(frozen=True)
class SelectionConfig:
    c_const: float = 2.5
    delta: float = 0.05
    interval_family: str = "all"
    sigma_method: Union[str, float] = "mad_diff"

    def __post_init__(self):
        if not self.c_const > 0:
            raise ValueError("c_const must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.interval_family not in ("all", "dyadic"):
            raise ValueError("interval_family must be 'all' or 'dyadic'")
        if isinstance(self.sigma_method, str) and self.sigma_method not in ("mad_diff", "mean_sq_diff"):
            raise ValueError(f"unknown sigma method {self.sigma_method!r}")
        if self.c_const < 2:
            warnings.warn(
                "c_const < 2 is below the range in which the log rule is known to behave well",
                stacklevel=2,
            )


def estimate_sigma(y, method: Union[str, float] = "mad_diff") -> float:
    """Noise level from first differences.

    ``mad_diff`` is the median absolute difference scaled to a Gaussian
    standard deviation; it ignores a minority of differences that straddle
    jumps.  ``mean_sq_diff`` uses the mean squared difference.  A number is
    returned unchanged.
    """
    if not isinstance(method, str):
        sigma = float(method)
        if not sigma >= 0:
            raise ValueError("fixed sigma must be non-negative")
        return sigma
    y = as_signal(y)
    if y.size < 2:
        raise ValueError("need at least two samples to estimate sigma")
    d = np.diff(y)
    if method == "mad_diff":
        return float(np.median(np.abs(d)) / (math.sqrt(2.0) * MAD_TO_SIGMA))
    if method == "mean_sq_diff":
        return float(math.sqrt(np.sum(d * d) / (2 * (y.size - 1))))
    raise ValueError(f"unknown sigma method {method!r}")


def log_penalty(n: int, sigma: float, c_const: float = 2.5) -> float:
    if n < 2:
        raise ValueError("n must be at least 2")
    if not sigma >= 0:
        raise ValueError("sigma must be non-negative")
    if not c_const > 0:
        raise ValueError("c_const must be positive")
    return c_const * sigma**2 * math.log(n) / n


def fit_log_rule(y, cfg: Optional[SelectionConfig] = None) -> Tuple[float, Segmentation]:
    """Fit with the log-rule penalty; a zero penalty falls back to the interpolating fit."""
    cfg = cfg or SelectionConfig()
    y = as_signal(y)
    sigma = estimate_sigma(y, cfg.sigma_method)
    gamma = log_penalty(y.size, sigma, cfg.c_const)
    if gamma == 0:
        return 0.0, interpolate(y)
    return gamma, fit_gamma(y, gamma)


class MRCheck(NamedTuple):
    passed: bool
    worst_interval: Tuple[int, int]
    worst_stat: float


def mr_check(y, fit: Segmentation, threshold: float, family: str = "all") -> MRCheck:
    """Largest ``|sum_I (y - fit)| / sqrt(#I)`` over the interval family.

    ``worst_interval`` is 1-based and inclusive.
    """
    y = as_signal(y)
    if fit.n != y.size:
        raise ValueError(f"fit has n = {fit.n} but data has n = {y.size}")
    resid = y - fit.fitted()
    prefix = np.concatenate([[0.0], np.cumsum(resid)])
    if family == "all":
        stat, i, j = _kernels.max_normalized_sum(prefix)
    elif family == "dyadic":
        stat, i, j = _kernels.max_normalized_sum_dyadic(prefix)
    else:
        raise ValueError("family must be 'all' or 'dyadic'")
    # rounding in the residuals of an exact fit must not fail a zero threshold
    slack = 1e-9 * float(np.max(np.abs(y))) + 1e-300
    return MRCheck(bool(stat <= threshold + slack), (int(i) + 1, int(j)), float(stat))


class MRSelection(NamedTuple):
    gamma: float
    fit: Segmentation
    passed: bool
    threshold: float
    sigma: float


def mr_select(y, cfg: Optional[SelectionConfig] = None, k_max: Optional[int] = None) -> MRSelection:
    """Largest gamma whose Potts fit passes the MR check.

    The gamma-optimal fits are visited from large to small gamma.  The first
    one that passes is returned with ``gamma`` set to the upper end of its
    gamma interval (``inf`` for the constant fit).  Fits are constant between
    knots, so this is the supremum of admissible gammas.  If nothing up to
    ``k_max`` jumps passes, the last fit visited is returned with
    ``passed=False``.
    """
    cfg = cfg or SelectionConfig()
    y = as_signal(y)
    n = y.size
    if n < 2:
        raise ValueError("need at least two samples")
    sigma = estimate_sigma(y, cfg.sigma_method)
    threshold = (1 + cfg.delta) * sigma * math.sqrt(2 * math.log(n))
    if k_max is None:
        k_max = default_k_max(n)
    fit = None
    gamma = math.inf
    for gamma, fit in gamma_walk(y, k_max):
        if mr_check(y, fit, threshold, cfg.interval_family).passed:
            return MRSelection(gamma, fit, True, threshold, sigma)
    return MRSelection(gamma, fit, False, threshold, sigma)


@dataclass(frozen=True)
class CnReport:
    """Maximal normalized squared partial sum; ``arg_i..arg_j`` is 1-based inclusive."""

    cn: float
    arg_i: int
    arg_j: int


def cn_statistic(xi) -> CnReport:
    """``max_{i<=j} (xi_i + ... + xi_j)**2 / ((j - i + 1) * log n)``, exact (pruned O(n^2) scan)."""
    xi = as_signal(xi)
    n = xi.size
    if n < 2:
        raise ValueError("need n >= 2 so that log n > 0")
    prefix = np.concatenate([[0.0], np.cumsum(xi)])
    root, i, j = _kernels.max_normalized_sum(prefix)
    return CnReport(float(root**2 / math.log(n)), int(i) + 1, int(j))
