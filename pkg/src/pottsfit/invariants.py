"""A-priori inequalities that every exact Potts minimizer satisfies.

For a minimizer at penalty ``gamma`` with segment lengths ``m`` (in samples)
and data means ``mu``:

* merging two neighbours never helps:
  ``gamma <= m1*m2 / (n*(m1+m2)) * (mu1 - mu2)**2``;
* splitting off a sub-run ``I`` of a segment with level ``a`` never helps:
  ``2*gamma >= |I|/n * (mean_I - a)**2``;
* shifting a jump between levels ``a | b`` across a run ``I`` of the ``b``
  side never helps: ``(b - a) * (mean_I - (a + b)/2) >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .potts import Segmentation
from .stepfn import as_signal

SLACK = 1e-9


@dataclass(frozen=True)
class MinimizerCheck:
    merge_margin: float
    split_margin: float
    shift_margin: float

    @property
    def ok(self) -> bool:
        return min(self.merge_margin, self.split_margin, self.shift_margin) >= -SLACK

    def describe(self) -> str:
        return (
            f"merge margin {self.merge_margin:.3g}, split margin {self.split_margin:.3g}, "
            f"shift margin {self.shift_margin:.3g}"
        )


def check_minimizer_bounds(y, fit: Segmentation, gamma: float) -> MinimizerCheck:
    """Smallest slack of each inequality over the whole fit (negative means violated)."""
    y = as_signal(y)
    n = y.size
    cum = np.concatenate([[0.0], np.cumsum(y)])
    bounds = np.array(fit.bounds, dtype=np.int64).reshape(-1, 2)
    starts, ends = bounds[:, 0], bounds[:, 1]
    lengths = (ends - starts).astype(float)
    means = (cum[ends] - cum[starts]) / lengths

    merge = np.inf
    if len(lengths) > 1:
        m1, m2 = lengths[:-1], lengths[1:]
        gain = m1 * m2 / (n * (m1 + m2)) * np.diff(means) ** 2
        merge = float(np.min(gain - gamma))

    excess = _kernels.max_subrun_excess(cum, starts, ends, means) / n
    split = float(2 * gamma - excess)

    shift = np.inf
    for s in range(len(lengths) - 1):
        a, b = means[s], means[s + 1]
        mid = 0.5 * (a + b)
        p = ends[s]
        # runs [p, p+r) inside the right segment
        r = np.arange(1, ends[s + 1] - p + 1)
        right = (cum[p + r] - cum[p]) / r
        # runs [p-r, p) inside the left segment
        r = np.arange(1, p - starts[s] + 1)
        left = (cum[p] - cum[p - r]) / r
        shift = min(
            shift,
            float(np.min((b - a) * (right - mid))),
            float(np.min((a - b) * (left - mid))),
        )
    return MinimizerCheck(merge, split, shift)
