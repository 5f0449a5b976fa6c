"""Right-continuous step functions on [0, 1) and sampled signals.

A sampled signal is a 1-D float array ``y`` of length ``n`` living on the
equidistant grid ``x_i = i/n``; :func:`embed` turns it into the step function
that equals ``y_i`` on ``[(i-1)/n, i/n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "StepFunction",
    "Interval",
    "as_signal",
    "embed",
    "mean_on_interval",
    "project",
    "l2_distance",
    "jump_set",
    "mpl",
    "delta_k",
]


def as_signal(y) -> np.ndarray:
    """Validate and convert a sampled signal to a float64 array."""
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("a sampled signal must be one-dimensional")
    if arr.size == 0:
        raise ValueError("a sampled signal needs at least one value")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sampled signal contains non-finite values")
    return arr


@dataclass(frozen=True)
class StepFunction:
    """Step function ``sum_i levels[i] * 1[t_i, t_{i+1})`` with ``t_0 = 0``, ``t_end = 1``.

    Adjacent pieces with identical levels are merged on construction, so
    ``breakpoints`` is always exactly the jump set.
    """

    breakpoints: tuple
    levels: tuple

    def __post_init__(self):
        bps = [float(b) for b in self.breakpoints]
        lvs = [float(v) for v in self.levels]
        if len(lvs) != len(bps) + 1:
            raise ValueError("need exactly one more level than breakpoints")
        if not all(math.isfinite(v) for v in lvs):
            raise ValueError("levels must be finite")
        for a, b in zip(bps, bps[1:]):
            if not a < b:
                raise ValueError("breakpoints must be strictly increasing")
        if bps and not (0.0 < bps[0] and bps[-1] < 1.0):
            raise ValueError("breakpoints must lie in the open interval (0, 1)")
        # exact comparison on purpose: no epsilon merging
        keep_b = []
        keep_l = [lvs[0]]
        for b, v in zip(bps, lvs[1:]):
            if v != keep_l[-1]:
                keep_b.append(b)
                keep_l.append(v)
        object.__setattr__(self, "breakpoints", tuple(keep_b))
        object.__setattr__(self, "levels", tuple(keep_l))

    @classmethod
    def constant(cls, value: float) -> "StepFunction":
        return cls((), (value,))

    @property
    def n_jumps(self) -> int:
        return len(self.breakpoints)

    def edges(self) -> np.ndarray:
        return np.concatenate([[0.0], self.breakpoints, [1.0]])

    def __call__(self, t):
        idx = np.searchsorted(np.asarray(self.breakpoints), t, side="right")
        return np.asarray(self.levels)[idx]

    def to_dict(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "levels": list(self.levels)}

    @classmethod
    def from_dict(cls, d: dict) -> "StepFunction":
        return cls(tuple(d["breakpoints"]), tuple(d["levels"]))


@dataclass(frozen=True)
class Interval:
    """Half-open interval ``[left, right)`` inside [0, 1]."""

    left: float
    right: float

    def __post_init__(self):
        if not (0.0 <= self.left < self.right <= 1.0):
            raise ValueError(f"invalid interval [{self.left}, {self.right})")

    @property
    def length(self) -> float:
        return self.right - self.left


def embed(u) -> StepFunction:
    """Piecewise-constant embedding of ``n`` samples onto [0, 1)."""
    u = as_signal(u)
    n = u.size
    jumps = np.flatnonzero(u[1:] != u[:-1]) + 1
    return StepFunction(tuple(jumps / n), tuple(u[np.concatenate([[0], jumps])]))


def _grid_index(t: float, n: int) -> int:
    k = round(t * n)
    if abs(k - t * n) > 1e-9 * max(1.0, n):
        raise ValueError(f"{t} is not a multiple of 1/{n}")
    return int(k)


def mean_on_interval(f: Union[StepFunction, np.ndarray, Sequence[float]], interval: Interval) -> float:
    """Mean of ``f`` over ``interval``.

    For a sampled signal the interval endpoints must sit on the grid.
    """
    if not isinstance(interval, Interval):
        interval = Interval(*interval)
    if isinstance(f, StepFunction):
        edges = f.edges()
        lo = np.clip(edges[:-1], interval.left, interval.right)
        hi = np.clip(edges[1:], interval.left, interval.right)
        return float(np.dot(hi - lo, f.levels) / interval.length)
    y = as_signal(f)
    n = y.size
    i = _grid_index(interval.left, n)
    j = _grid_index(interval.right, n)
    return float(y[i:j].mean())


def project(f, jumps: Iterable[float]) -> StepFunction:
    """Least-squares projection of a sampled signal onto steps with jumps in ``jumps``."""
    y = as_signal(f)
    n = y.size
    idx = sorted({_grid_index(t, n) for t in jumps})
    if idx and (idx[0] <= 0 or idx[-1] >= n):
        raise ValueError("breakpoints must lie strictly inside (0, 1)")
    cuts = [0, *idx, n]
    levels = [y[a:b].mean() for a, b in zip(cuts, cuts[1:])]
    return StepFunction(tuple(i / n for i in idx), tuple(levels))


def _merged(f: StepFunction, g: StepFunction):
    edges = np.union1d(f.edges(), g.edges())
    mids = 0.5 * (edges[:-1] + edges[1:])
    return np.diff(edges), f(mids), g(mids)


def l2_distance(f: StepFunction, g: StepFunction) -> float:
    widths, fv, gv = _merged(f, g)
    return math.sqrt(max(0.0, float(np.dot(widths, (fv - gv) ** 2))))


def sup_norm_difference(f: StepFunction, g: StepFunction) -> float:
    _, fv, gv = _merged(f, g)
    return float(np.max(np.abs(fv - gv)))


def jump_set(f: StepFunction) -> tuple:
    return f.breakpoints


def mpl(f: StepFunction) -> float:
    """Minimal plateau length: smallest gap in ``J(f) | {0, 1}``."""
    return float(np.min(np.diff(f.edges())))


def delta_k(f, k: int):
    """Best grid-aligned approximation error with at most ``k`` jumps.

    Returns ``(error, segmentation)`` where ``error = sqrt(rss / n)``.
    """
    from .potts import fit_k

    y = as_signal(f)
    if k < 0 or k > y.size - 1:
        raise ValueError(f"k must be in [0, {y.size - 1}], got {k}")
    seg = fit_k(y, k)
    return math.sqrt(seg.rss / y.size), seg

