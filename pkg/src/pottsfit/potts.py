"""Exact minimizers of the Potts functional.

For data ``y`` of length ``n`` the functional is

    H_gamma(u, y) = (1/n) * sum_i (u_i - y_i)**2 + gamma * #J(u)

where ``J(u)`` is the set of indices ``j`` in ``1..n-1`` with ``u_j != u_{j+1}``.
The dynamic programs work on ``rss + lam * #J`` with ``lam = n * gamma``;
that conversion happens only in :func:`fit_gamma`.

Among several minimizers the one with the fewest jumps is returned, and among
those the lexicographically smallest jump sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .stepfn import StepFunction, as_signal

__all__ = [
    "PrefixMoments",
    "Segmentation",
    "SolutionPath",
    "LayeredDP",
    "segment_cost",
    "fit_k",
    "fit_gamma",
    "interpolate",
    "solve_path",
    "gamma_walk",
    "knot_below",
    "brute_force_fit",
    "default_k_max",
]

# relative width of the band in which two objective values count as tied
TIE_RTOL = 1e-10
BRUTE_FORCE_MAX_N = 20


@dataclass(frozen=True)
class PrefixMoments:
    """Prefix sums ``cum[j] = y_1 + ... + y_j`` and the same for squares.

    The data are centred on their mean before accumulation; segment costs are
    shift invariant and this keeps ``(sum y)**2 / len`` away from cancellation.
    """

    cum: np.ndarray
    cumsq: np.ndarray
    shift: float

    @classmethod
    def from_signal(cls, y) -> "PrefixMoments":
        y = as_signal(y)
        shift = float(np.mean(y))
        z = np.asarray(y - shift, dtype=np.longdouble)
        cum = np.concatenate([[0.0], np.cumsum(z)]).astype(np.float64)
        cumsq = np.concatenate([[0.0], np.cumsum(z * z)]).astype(np.float64)
        return cls(cum, cumsq, shift)

    @property
    def n(self) -> int:
        return self.cum.size - 1

    @property
    def tol(self) -> float:
        return TIE_RTOL * float(self.cumsq[-1])


def segment_cost(m: PrefixMoments, i: int, j: int) -> float:
    """Residual sum of squares of ``y_i..y_j`` (1-based, inclusive) about its mean."""
    if not (1 <= i <= j <= m.n):
        raise ValueError(f"need 1 <= i <= j <= {m.n}, got ({i}, {j})")
    return float(_kernels._cost(m.cum, m.cumsq, i - 1, j))


@dataclass(frozen=True)
class Segmentation:
    """A piecewise-constant fit to ``n`` samples.

    ``jumps`` are 1-based: a jump ``j`` separates samples ``j`` and ``j + 1``.
    ``levels`` are the data means of the segments and ``rss`` is recomputed
    from them.
    """

    n: int
    jumps: tuple
    levels: tuple
    rss: float

    @classmethod
    def from_jumps(cls, y, jumps: Sequence[int]) -> "Segmentation":
        y = as_signal(y)
        n = y.size
        jumps = tuple(int(j) for j in jumps)
        cuts = (0, *jumps, n)
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValueError(f"jumps must be strictly increasing inside 1..{n - 1}")
        levels = tuple(float(np.mean(y[a:b])) for a, b in zip(cuts, cuts[1:]))
        fitted = np.repeat(levels, np.diff(cuts))
        rss = float(np.sum((y - fitted) ** 2))
        return cls(n, jumps, levels, rss)

    @property
    def n_jumps(self) -> int:
        return len(self.jumps)

    @property
    def bounds(self) -> list:
        return list(zip((0, *self.jumps), (*self.jumps, self.n)))

    def fitted(self) -> np.ndarray:
        cuts = np.array((0, *self.jumps, self.n))
        return np.repeat(np.asarray(self.levels), np.diff(cuts))

    def h_value(self, gamma: float) -> float:
        return self.rss / self.n + gamma * self.n_jumps

    def to_step_function(self) -> StepFunction:
        return StepFunction(tuple(j / self.n for j in self.jumps), self.levels)

    def jump_positions(self) -> tuple:
        return tuple(j / self.n for j in self.jumps)

    def to_dict(self, gamma: Optional[float] = None) -> dict:
        d = {
            "n": self.n,
            "gamma": gamma,
            "jumps": list(self.jumps),
            "levels": list(self.levels),
            "rss": self.rss,
        }
        d["h_value"] = None if gamma is None or math.isinf(gamma) else self.h_value(gamma)
        return d


def _follow(first, n: int) -> list:
    """Read a jump sequence off first-jump pointers; ``first(l)`` gives the pointer array to use at depth ``l``."""
    jumps = []
    l = 0
    while True:
        j = int(first(len(jumps))[l])
        if j >= n:
            return jumps
        jumps.append(j)
        l = j


def fit_gamma(y, gamma: float) -> Segmentation:
    """Exact minimizer of ``H_gamma(., y)`` in O(n^2)."""
    if not gamma > 0:
        raise ValueError("gamma must be positive; use interpolate(y) for the gamma -> 0 limit")
    if math.isinf(gamma):
        return Segmentation.from_jumps(y, ())
    y = as_signal(y)
    m = PrefixMoments.from_signal(y)
    lam = m.n * gamma
    _, _, first = _kernels.potts_suffix_dp(m.cum, m.cumsq, lam, m.tol)
    return Segmentation.from_jumps(y, _follow(lambda depth: first, m.n))


def interpolate(y) -> Segmentation:
    """The limit of :func:`fit_gamma` as gamma -> 0: ``u = y`` with equal neighbours merged."""
    y = as_signal(y)
    return Segmentation.from_jumps(y, np.flatnonzero(y[1:] != y[:-1]) + 1)


class LayeredDP:
    """Jump-count constrained DP, extended one layer at a time.

    Layer ``m`` holds, for every suffix ``y[l:]``, the best fit with at most
    ``m`` jumps under the usual tie rule.
    """

    def __init__(self, y):
        self.y = as_signal(y)
        self.moments = PrefixMoments.from_signal(self.y)
        self.n = self.y.size
        v, c, f = _kernels.layer_zero(self.moments.cum, self.moments.cumsq)
        self._value = [v]
        self._count = [c]
        self._first = [f]

    @property
    def k_max(self) -> int:
        return len(self._value) - 1

    def extend(self, k: int) -> None:
        k = min(k, self.n - 1)
        m = self.moments
        while self.k_max < k:
            v, c, f = _kernels.layer_step(
                m.cum, m.cumsq, self._value[-1], self._count[-1], self._first[-1], m.tol
            )
            self._value.append(v)
            self._count.append(c)
            self._first.append(f)

    def rss(self, k: int) -> float:
        self.extend(k)
        return float(self._value[k][0])

    def count(self, k: int) -> int:
        self.extend(k)
        return int(self._count[k][0])

    def segmentation(self, k: int) -> Segmentation:
        self.extend(k)
        return Segmentation.from_jumps(self.y, _follow(lambda depth: self._first[k - depth], self.n))


def fit_k(y, k: int) -> Segmentation:
    """Least-squares fit with at most ``k`` jumps, using the fewest jumps that attain the optimum."""
    y = as_signal(y)
    if not 0 <= k <= y.size - 1:
        raise ValueError(f"k must be in [0, {y.size - 1}], got {k}")
    dp = LayeredDP(y)
    return dp.segmentation(k)


def default_k_max(n: int) -> int:
    return max(1, min(n - 1, math.ceil(n / 2)))


@dataclass
class SolutionPath:
    """Best fits for every jump budget ``k = 0..k_max`` and the gamma knots.

    ``hull`` lists the jump counts that are gamma-optimal, from large gamma to
    small.  ``knots[i]`` is the threshold between ``hull[i]`` (optimal on
    ``[knots[i], knots[i-1])``) and ``hull[i+1]`` (optimal just below it).
    ``hull[0] == 0`` is optimal on ``[knots[0], inf)``.  ``ks`` stops at the
    first count that reaches the minimal RSS.  ``complete`` is False when
    larger budgets than ``k_max`` could still lower the RSS.
    """

    n: int
    ks: list
    rss: list
    jumps: list
    hull: list
    knots: list
    complete: bool = True

    def optimal_k(self, gamma: float) -> int:
        for k, knot in zip(self.hull, self.knots):
            if gamma >= knot:
                return k
        return self.hull[-1]

    def predicted_h(self, gamma: float) -> float:
        k = self.optimal_k(gamma)
        return self.rss[k] / self.n + gamma * k

    def gamma_interval(self, k: int) -> tuple:
        """``(lower, upper)`` gamma range on which hull count ``k`` is optimal."""
        i = self.hull.index(k)
        upper = math.inf if i == 0 else self.knots[i - 1]
        lower = self.knots[i] if i < len(self.knots) else 0.0
        return lower, upper

    def to_dict(self) -> dict:
        return {
            "ks": list(self.ks),
            "rss": list(self.rss),
            "jumps": [list(j) for j in self.jumps],
            "knots": [{"gamma": g, "k": k} for g, k in zip(self.knots, self.hull[1:])],
            "hull": list(self.hull),
        }


def _next_vertex(rss: Sequence[float], c: int, n: int, tol: float):
    """Hull neighbour of vertex ``c`` among the computed counts: ``(k, slope)``."""
    best_k = None
    best_s = 0.0
    for k in range(c + 1, len(rss)):
        drop = rss[c] - rss[k]
        if drop <= tol:
            continue
        s = drop / (n * (k - c))
        if best_k is None or s > best_s * (1 + 1e-12) or (abs(s - best_s) <= 1e-12 * best_s and k > best_k):
            best_k, best_s = k, s
    return best_k, best_s


def knot_below(y, fit: Segmentation, tol: Optional[float] = None) -> Optional[float]:
    """Smallest gamma at which ``fit`` is still gamma-optimal, or None if no fit beats it.

    This is ``max_k (rss(fit) - rss_k) / (n * (k - #J(fit)))`` over all
    larger jump counts, found by parametric (Dinkelbach) iteration: each
    single-gamma fit either certifies the current slope or yields a steeper
    one.  ``fit`` must itself be gamma-optimal for some gamma.
    """
    y = as_signal(y)
    n = y.size
    if tol is None:
        tol = PrefixMoments.from_signal(y).tol
    c = fit.n_jumps
    floor = interpolate(y)
    if fit.rss - floor.rss <= tol or floor.n_jumps <= c:
        return None
    s = (fit.rss - floor.rss) / (n * (floor.n_jumps - c))
    while True:
        other = fit_gamma(y, s)
        k = other.n_jumps
        if k <= c or fit.rss - other.rss <= n * s * (k - c) + tol:
            return s
        s_next = (fit.rss - other.rss) / (n * (k - c))
        if not s_next > s:
            return s
        s = s_next


def gamma_walk(y, k_max: Optional[int] = None):
    """Yield ``(upper_knot, fit)`` for the gamma-optimal fits from large to small gamma.

    ``fit`` is optimal on ``[next knot, upper_knot)``; the first fit is the
    constant one with ``upper_knot = inf``.  Fits with more than ``k_max``
    jumps are not visited.
    """
    y = as_signal(y)
    n = y.size
    tol = PrefixMoments.from_signal(y).tol
    if k_max is None:
        k_max = n - 1
    fit = Segmentation.from_jumps(y, ())
    upper = math.inf
    while True:
        yield upper, fit
        knot = knot_below(y, fit, tol)
        if knot is None:
            return
        # just below the knot every collinear count is beaten by the largest one
        below = knot - 4 * tol / n
        nxt = fit_gamma(y, below) if below > 0 else interpolate(y)
        if nxt.n_jumps <= fit.n_jumps or nxt.n_jumps > k_max:
            return
        fit, upper = nxt, knot


def solve_path(y, k_max: Optional[int] = None) -> SolutionPath:
    """All constrained fits up to ``k_max`` jumps plus the gamma knots."""
    y = as_signal(y)
    n = y.size
    if n == 1:
        seg = Segmentation.from_jumps(y, ())
        return SolutionPath(1, [0], [seg.rss], [()], [0], [])
    if k_max is None:
        k_max = n - 1
    if not 1 <= k_max <= n - 1:
        raise ValueError(f"k_max must be in [1, {n - 1}], got {k_max}")
    dp = LayeredDP(y)
    # stop once an extra jump no longer lowers the RSS; every larger budget
    # returns the same fit
    last = k_max
    for k in range(1, k_max + 1):
        if dp.count(k) < k:
            last = k - 1
            break
    ks = list(range(last + 1))
    segs = [dp.segmentation(k) for k in ks]
    rss = [dp.rss(k) for k in ks]
    hull = [0]
    knots = []
    c = 0
    while True:
        k, s = _next_vertex(rss, c, n, dp.moments.tol)
        if k is None:
            break
        hull.append(k)
        knots.append(s)
        c = k
    return SolutionPath(
        n=n,
        ks=ks,
        rss=[s.rss for s in segs],
        jumps=[s.jumps for s in segs],
        hull=hull,
        knots=knots,
        complete=last < k_max or k_max == n - 1,
    )


def _all_patterns(y: np.ndarray):
    n = y.size
    p = 1 << (n - 1)
    codes = np.arange(p, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n - 1)) & 1).astype(np.int64)
    labels = np.concatenate([np.zeros((p, 1), dtype=np.int64), np.cumsum(bits, axis=1)], axis=1)
    flat = (labels + np.arange(p)[:, None] * n).ravel()
    sums = np.bincount(flat, weights=np.tile(y, p), minlength=p * n)
    counts = np.bincount(flat, minlength=p * n)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    resid = np.tile(y, p) - means[flat]
    rss = np.sum(resid.reshape(p, n) ** 2, axis=1)
    return bits, bits.sum(axis=1), rss


def brute_force_fit(y, gamma: float) -> Segmentation:
    """Exhaustive minimizer of ``H_gamma`` over all ``2**(n-1)`` jump patterns (n <= 20)."""
    y = as_signal(y)
    n = y.size
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force refused for n = {n} > {BRUTE_FORCE_MAX_N}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if n == 1:
        return Segmentation.from_jumps(y, ())
    bits, nj, rss = _all_patterns(y - y.mean())
    value = rss + n * gamma * nj
    tol = TIE_RTOL * float(np.sum((y - y.mean()) ** 2))
    cand = np.flatnonzero(value <= value.min() + tol)
    fewest = nj[cand].min()
    cand = cand[nj[cand] == fewest]
    best = min(tuple(int(j) + 1 for j in np.flatnonzero(bits[c])) for c in cand)
    return Segmentation.from_jumps(y, best)
