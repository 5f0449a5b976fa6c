"""Compiled inner loops.

Everything here works on 0-based prefix-sum arrays of length ``n + 1`` and
plain numpy buffers so the public modules can stay readable.  A segment
``y[l:j]`` has cost ``sum(y**2) - sum(y)**2 / (j - l)`` clipped at zero.
Kernels are ``nogil`` so replicate loops can use threads.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _cost(cum, cumsq, l, j):
    s = cum[j] - cum[l]
    c = (cumsq[j] - cumsq[l]) - s * s / (j - l)
    if c < 0.0:
        return 0.0
    return c


@njit(cache=True, nogil=True)
def potts_suffix_dp(cum, cumsq, lam, tol):
    """Backward DP for ``rss + lam * #jumps``.

    ``value[l]`` is the optimum over ``y[l:]``; ``first[l]`` the end of the
    first segment (``n`` means no further jump).  Ties within ``tol`` go to
    fewer jumps, then to the smaller first jump, which yields the
    lexicographically smallest jump sequence overall.
    """
    n = cum.shape[0] - 1
    value = np.empty(n + 1)
    count = np.empty(n + 1, dtype=np.int64)
    first = np.empty(n + 1, dtype=np.int64)
    value[n] = 0.0
    count[n] = 0
    first[n] = n
    for l in range(n - 1, -1, -1):
        best = _cost(cum, cumsq, l, n)
        bc = 0
        bj = n
        for j in range(l + 1, n):
            v = _cost(cum, cumsq, l, j) + lam + value[j]
            k = count[j] + 1
            if v < best - tol:
                best = v
                bc = k
                bj = j
            elif v <= best + tol:
                if k < bc or (k == bc and j < bj):
                    best = v
                    bc = k
                    bj = j
        value[l] = best
        count[l] = bc
        first[l] = bj
    return value, count, first


@njit(cache=True, nogil=True)
def layer_zero(cum, cumsq):
    n = cum.shape[0] - 1
    value = np.zeros(n + 1)
    count = np.zeros(n + 1, dtype=np.int64)
    first = np.full(n + 1, n, dtype=np.int64)
    for l in range(n):
        value[l] = _cost(cum, cumsq, l, n)
    return value, count, first


@njit(cache=True, nogil=True)
def layer_step(cum, cumsq, prev_value, prev_count, prev_first, tol):
    """One layer of the jump-count constrained DP (at most ``m`` jumps)."""
    n = cum.shape[0] - 1
    value = np.zeros(n + 1)
    count = np.zeros(n + 1, dtype=np.int64)
    first = np.full(n + 1, n, dtype=np.int64)
    for l in range(n):
        best = prev_value[l]
        bc = prev_count[l]
        bj = prev_first[l]
        for j in range(l + 1, n):
            v = _cost(cum, cumsq, l, j) + prev_value[j]
            k = prev_count[j] + 1
            if v < best - tol:
                best = v
                bc = k
                bj = j
            elif v <= best + tol:
                if k < bc or (k == bc and j < bj):
                    best = v
                    bc = k
                    bj = j
        value[l] = best
        count[l] = bc
        first[l] = bj
    return value, count, first


@njit(cache=True, nogil=True)
def max_normalized_sum_scan(prefix):
    """max over 0 <= i < j <= n of |prefix[j] - prefix[i]| / sqrt(j - i), plain O(n^2) scan."""
    n = prefix.shape[0] - 1
    best = -1.0
    bi = 0
    bj = 1
    for i in range(n):
        pi = prefix[i]
        for j in range(i + 1, n + 1):
            d = prefix[j] - pi
            v = d * d / (j - i)
            if v > best:
                best = v
                bi = i
                bj = j
    return np.sqrt(best), bi, bj


@njit(cache=True)
def _block_extrema(prefix):
    m = prefix.shape[0]
    levels = 1
    while (1 << levels) < m:
        levels += 1
    hi = np.empty((levels, m))
    lo = np.empty((levels, m))
    hi[0, :] = prefix
    lo[0, :] = prefix
    for l in range(1, levels):
        half = 1 << (l - 1)
        for k in range(0, (m + (1 << l) - 1) >> l):
            a = 2 * k
            b = a + 1
            if b * half < m:
                hi[l, k] = max(hi[l - 1, a], hi[l - 1, b])
                lo[l, k] = min(lo[l - 1, a], lo[l - 1, b])
            else:
                hi[l, k] = hi[l - 1, a]
                lo[l, k] = lo[l - 1, a]
    return hi, lo


@njit(cache=True, nogil=True)
def max_normalized_sum(prefix):
    """Same value and maximizer as ``max_normalized_sum_scan``.

    Visits ``j`` in the same order but skips aligned blocks of ``j`` whose
    prefix range proves that no member can beat the current maximum.  The
    bound is monotone under rounding, so the result is bit-identical.
    """
    n = prefix.shape[0] - 1
    hi, lo = _block_extrema(prefix)
    top = hi.shape[0] - 1
    best = -1.0
    bi = 0
    bj = 1
    for i in range(n):
        pi = prefix[i]
        j = i + 1
        l = 0
        while j <= n:
            while l < top and (j & ((1 << (l + 1)) - 1)) == 0:
                l += 1
            while True:
                k = j >> l
                u = max(hi[l, k] - pi, pi - lo[l, k])
                if u * u / (j - i) <= best:
                    j += 1 << l
                    break
                if l == 0:
                    d = prefix[j] - pi
                    v = d * d / (j - i)
                    if v > best:
                        best = v
                        bi = i
                        bj = j
                    j += 1
                    break
                l -= 1
    return np.sqrt(best), bi, bj


@njit(cache=True, nogil=True)
def max_normalized_sum_dyadic(prefix):
    n = prefix.shape[0] - 1
    best = -1.0
    bi = 0
    bj = 1
    length = 1
    while length <= n:
        i = 0
        while i + length <= n:
            d = prefix[i + length] - prefix[i]
            v = d * d / length
            if v > best:
                best = v
                bi = i
                bj = i + length
            i += length
        length *= 2
    return np.sqrt(best), bi, bj


@njit(cache=True, nogil=True)
def max_subrun_excess(cum, starts, ends, levels):
    """Largest ``len * (mean - level)**2`` over all sub-runs of all segments."""
    best = 0.0
    for s in range(starts.shape[0]):
        a = starts[s]
        b = ends[s]
        lv = levels[s]
        for i in range(a, b):
            for j in range(i + 1, b + 1):
                d = (cum[j] - cum[i]) - (j - i) * lv
                v = d * d / (j - i)
                if v > best:
                    best = v
    return best
