"""Distances between step functions and between their jump sets.

The Skorokhod J1 distance is computed exactly for step functions.  For a
tolerance ``eps`` the question "is there a time change with log-slope
distortion at most ``eps`` under which the two functions stay within
``eps`` of each other" depends only on where the time change sends the jumps
of ``g``, and it is answered by sweeping over those jumps while tracking the
reachable interval of positions in every piece of ``f``.  The infimum is one
of finitely many candidate values (level differences and log-ratios of gaps
between jump positions), so a binary search over the sorted candidates
returns it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .stepfn import StepFunction, l2_distance, sup_norm_difference

__all__ = [
    "SkorokhodResult",
    "hausdorff",
    "skorokhod",
    "sup_distance",
    "l2_distance",
]

_TOL = 1e-12


def hausdorff(a: Sequence[float], b: Sequence[float]) -> float:
    """Hausdorff distance between finite subsets of (0, 1).

    One empty set gives 1; two empty sets give 0.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return 1.0
    return max(_directed(a, b), _directed(b, a))


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    idx = np.searchsorted(b, a)
    left = np.abs(a - b[np.clip(idx - 1, 0, b.size - 1)])
    right = np.abs(b[np.clip(idx, 0, b.size - 1)] - a)
    return float(np.max(np.minimum(left, right)))


def sup_distance(f: StepFunction, g: StepFunction) -> float:
    return sup_norm_difference(f, g)


@dataclass(frozen=True)
class SkorokhodResult:
    """``distance`` with a time change realizing it.

    ``matching`` pairs jump positions of ``f`` with jump positions of ``g``
    that the time change aligns; ``knots`` are the points ``(t, lambda(t))``
    of the piecewise-linear time change at the jumps of ``g``.
    """

    distance: float
    matching: tuple
    l_lambda: float
    sup_term: float
    knots: tuple = ()


class _State:
    __slots__ = ("piece", "lo", "hi", "parents")

    def __init__(self, piece, lo, hi, parents):
        self.piece = piece
        self.lo = lo
        self.hi = hi
        # (parent index, lowest piece in row, highest piece in row, lo, hi)
        self.parents = parents


def _sweep(s, a, t, c, eps):
    """Reachable states after each jump of ``g``, or ``None`` if infeasible.

    ``s``/``t`` are the piece boundaries of ``f``/``g`` (including 0 and 1),
    ``a``/``c`` their levels.  A state says ``lambda(t_y)`` lies in
    ``[lo, hi]`` inside piece ``piece`` of ``f``.
    """
    p = len(a) - 1
    q = len(c) - 1
    ok = np.abs(np.subtract.outer(np.asarray(a), np.asarray(c))) <= eps + _TOL
    if not ok[0, 0]:
        return None
    lo_slope = math.exp(-eps)
    hi_slope = math.exp(eps)
    layers = [[_State(0, 0.0, 0.0, [])]]
    for y in range(q + 1):
        dt = t[y + 1] - t[y]
        last = y == q
        cand = {}
        for idx, st in enumerate(layers[-1]):
            rlo = st.lo + lo_slope * dt
            rhi = st.hi + hi_slope * dt
            top = st.piece
            while top + 1 <= p and ok[top + 1, y]:
                top += 1
            if last:
                if top == p and rlo - _TOL <= 1.0 <= rhi + _TOL:
                    cand.setdefault(p, []).append((1.0, 1.0, idx, st.piece, p))
                continue
            for x in range(st.piece, top + 1):
                wlo = max(rlo, s[x])
                whi = min(rhi, s[x + 1])
                if wlo <= whi + _TOL and ok[x, y + 1]:
                    cand.setdefault(x, []).append((wlo, min(max(whi, wlo), s[x + 1]), idx, st.piece, x))
            # land exactly on the next jump of f: both functions jump together
            x = top + 1
            if x <= p and ok[x, y + 1] and rlo - _TOL <= s[x] <= rhi + _TOL:
                cand.setdefault(x, []).append((s[x], s[x], idx, st.piece, top))
        if not cand:
            return None
        layer = []
        for x in sorted(cand):
            pieces = sorted(cand[x])
            cur = None
            for wlo, whi, idx, row_lo, row_hi in pieces:
                if cur is not None and wlo <= cur.hi + _TOL:
                    cur.hi = max(cur.hi, whi)
                    cur.parents.append((idx, row_lo, row_hi, wlo, whi))
                else:
                    cur = _State(x, wlo, whi, [(idx, row_lo, row_hi, wlo, whi)])
                    layer.append(cur)
        layers.append(layer)
    return layers


def _candidates(s, a, t, c, cap: float) -> np.ndarray:
    s = np.asarray(s)
    t = np.asarray(t)
    ds = (s[None, :] - s[:, None])[np.triu_indices(s.size, 1)]
    dt = (t[None, :] - t[:, None])[np.triu_indices(t.size, 1)]
    logs = np.abs(np.log(np.divide.outer(ds, dt))).ravel()
    levels = np.abs(np.subtract.outer(np.asarray(a), np.asarray(c))).ravel()
    cand = np.unique(np.concatenate([[0.0], logs, levels]))
    return cand[cand <= cap]


def _trace(layers, s, a, t, c, eps):
    lo_slope = math.exp(-eps)
    hi_slope = math.exp(eps)
    q = len(c) - 1
    vals = [0.0] * (q + 2)
    vals[q + 1] = 1.0
    cells = []
    st = layers[-1][0]
    w = 1.0
    for y in range(q, -1, -1):
        dt = t[y + 1] - t[y]
        prev = layers[y]
        choice = None
        for idx, row_lo, row_hi, wlo, whi in st.parents:
            if wlo - 1e-9 <= w <= whi + 1e-9:
                par = prev[idx]
                vlo = max(par.lo, w - hi_slope * dt)
                vhi = min(par.hi, w - lo_slope * dt)
                if vlo <= vhi + 1e-9:
                    choice = (par, row_lo, row_hi, 0.5 * (vlo + vhi) if vlo <= vhi else vhi)
                    break
        if choice is None:
            raise RuntimeError("failed to reconstruct time change")
        par, row_lo, row_hi, v = choice
        cells.extend((x, y) for x in range(row_lo, row_hi + 1))
        vals[y] = v if y > 0 else 0.0
        st = par
        w = vals[y]
    return vals, cells


def skorokhod(f: StepFunction, g: StepFunction) -> SkorokhodResult:
    """Skorokhod J1 distance between two step functions on [0, 1]."""
    s = [0.0, *f.breakpoints, 1.0]
    t = [0.0, *g.breakpoints, 1.0]
    a = list(f.levels)
    c = list(g.levels)
    cap = sup_distance(f, g)
    cand = _candidates(s, a, t, c, cap)
    if cand.size == 0 or cand[-1] < cap:
        cand = np.append(cand, cap)
    lo, hi = 0, cand.size - 1
    layers = _sweep(s, a, t, c, cand[hi])
    if layers is None:
        # identity time change is always admissible at the sup distance
        raise RuntimeError("sup distance infeasible; inconsistent inputs")
    best = (cand[hi], layers)
    while lo < hi:
        mid = (lo + hi) // 2
        res = _sweep(s, a, t, c, cand[mid])
        if res is None:
            lo = mid + 1
        else:
            hi = mid
            best = (cand[mid], res)
    eps, layers = best
    vals, cells = _trace(layers, s, a, t, c, eps)
    tt = np.asarray(t)
    vv = np.asarray(vals)
    l_lambda = float(np.max(np.abs(np.log(np.diff(vv) / np.diff(tt)))))
    sup_term = max(abs(a[x] - c[y]) for x, y in cells)
    f_jumps = list(f.breakpoints)
    matching = []
    for y in range(1, len(t) - 1):
        for i, sj in enumerate(f_jumps):
            if abs(vals[y] - sj) <= 1e-9:
                matching.append((sj, t[y]))
    return SkorokhodResult(
        distance=float(eps),
        matching=tuple(matching),
        l_lambda=l_lambda,
        sup_term=float(sup_term),
        knots=tuple(zip(t, vals)),
    )
