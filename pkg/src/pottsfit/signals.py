"""Test signals and sub-Gaussian noise.

Step signals are sampled by exact cell averages over ``[(i-1)/n, i/n)``.
All other families, including ``blocks``, are evaluated at the cell midpoints
``(i - 1/2)/n``.  Midpoint evaluation keeps ``blocks`` free of the extra
half-height samples that cell averaging would put at its off-grid jumps.

The Donoho-Johnstone families use the usual WaveLab knot locations and
heights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stepfn import as_signal

__all__ = [
    "SignalSpec",
    "NoiseSpec",
    "FAMILIES",
    "NOISE_FAMILIES",
    "generate",
    "add_noise",
    "sigma_for_snr",
    "make_rng",
    "DEFAULT_STEP",
]

DJ_KNOTS = np.array([0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81])
BLOCKS_HEIGHTS = np.array([4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])
BUMPS_HEIGHTS = np.array([4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2])
BUMPS_WIDTHS = np.array([0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005])

# three jumps on dyadic positions, minimal plateau length 0.25
DEFAULT_STEP = {"jumps": (0.25, 0.5, 0.75), "levels": (0.0, 2.0, -1.0, 1.0)}

FAMILIES = (
    "blocks",
    "bumps",
    "heavisine",
    "doppler",
    "step",
    "lipschitz_ramp",
    "holder",
    "bv_example",
)
NOISE_FAMILIES = ("gaussian", "rademacher", "uniform")


@dataclass(frozen=True)
class SignalSpec:
    family: str
    n: int
    jumps: tuple = DEFAULT_STEP["jumps"]
    levels: tuple = DEFAULT_STEP["levels"]
    alpha: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown signal family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.family == "holder" and not 0 < self.alpha <= 1:
            raise ValueError("holder exponent must lie in (0, 1]")
        if self.family == "step":
            if len(self.levels) != len(self.jumps) + 1:
                raise ValueError("step signal needs len(levels) == len(jumps) + 1")
            js = list(self.jumps)
            if js != sorted(set(js)) or (js and not (0 < js[0] and js[-1] < 1)):
                raise ValueError("step jumps must be strictly increasing inside (0, 1)")

    def with_n(self, n: int) -> "SignalSpec":
        return SignalSpec(self.family, n, self.jumps, self.levels, self.alpha)

    @property
    def is_step(self) -> bool:
        return self.family in ("step", "blocks")


def _step_cell_averages(jumps, levels, n: int) -> np.ndarray:
    edges = np.concatenate([[0.0], jumps, [1.0]])
    cells = np.arange(n + 1) / n
    # integral of the step function from 0 to each cell boundary
    piece_int = np.concatenate([[0.0], np.cumsum(np.diff(edges) * np.asarray(levels, dtype=float))])
    idx = np.clip(np.searchsorted(edges, cells, side="right") - 1, 0, len(levels) - 1)
    integral = piece_int[idx] + (cells - edges[idx]) * np.asarray(levels, dtype=float)[idx]
    return np.diff(integral) * n


def generate(spec: SignalSpec) -> np.ndarray:
    """Sample the clean signal of ``spec`` on ``n`` cells."""
    n = spec.n
    t = (np.arange(n) + 0.5) / n
    fam = spec.family
    if fam == "step":
        return _step_cell_averages(spec.jumps, spec.levels, n)
    if fam == "blocks":
        return (t[:, None] >= DJ_KNOTS).astype(float) @ BLOCKS_HEIGHTS
    if fam == "bumps":
        return (BUMPS_HEIGHTS / (1 + np.abs((t[:, None] - DJ_KNOTS) / BUMPS_WIDTHS)) ** 4).sum(axis=1)
    if fam == "heavisine":
        return 4 * np.sin(4 * np.pi * t) - np.where(t >= 0.3, 1.0, -1.0) - np.where(t < 0.72, 1.0, -1.0)
    if fam == "doppler":
        return np.sqrt(t * (1 - t)) * np.sin(2 * np.pi * 1.05 / (t + 0.05))
    if fam == "lipschitz_ramp":
        return t.copy()
    if fam == "holder":
        return t**spec.alpha
    if fam == "bv_example":
        # ramp of height 1/2 plus two steps of 1/4: monotone, total variation 1
        return 0.5 * t + 0.25 * ((t >= 1 / 3).astype(float) + (t >= 2 / 3).astype(float))
    raise ValueError(f"unknown signal family {fam!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """I.i.d. noise with standard deviation ``sigma``.

    ``beta`` is the sub-Gaussian constant in ``E exp(v * xi) <= exp(beta * v**2)``:
    ``sigma**2 / 2`` for Gaussian noise, and ``r**2 / 2`` for the bounded
    families with ``|xi| <= r`` (Hoeffding).
    """

    family: str = "gaussian"
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}")
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")

    @property
    def bound(self) -> float:
        if self.family == "rademacher":
            return self.sigma
        if self.family == "uniform":
            return math.sqrt(3.0) * self.sigma
        return math.inf

    @property
    def beta(self) -> float:
        if self.family == "gaussian":
            return self.sigma**2 / 2
        return self.bound**2 / 2


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF))


def draw_noise(spec: NoiseSpec, n: int) -> np.ndarray:
    rng = make_rng(spec.seed)
    if spec.family == "gaussian":
        xi = rng.standard_normal(n)
    elif spec.family == "rademacher":
        xi = rng.integers(0, 2, size=n) * 2.0 - 1.0
    else:
        xi = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=n)
    return spec.sigma * xi


def add_noise(f, spec: NoiseSpec) -> np.ndarray:
    f = as_signal(f)
    if spec.sigma == 0:
        return f.copy()
    return f + draw_noise(spec, f.size)


def sigma_for_snr(f, snr: float) -> float:
    """Noise level with ``||f||**2 / sigma**2 == snr`` (``||.||`` the L2 norm of the embedding)."""
    f = as_signal(f)
    if not snr > 0:
        raise ValueError("snr must be positive")
    energy = float(np.mean(f * f))
    if energy == 0:
        raise ValueError("signal is identically zero")
    return math.sqrt(energy / snr)
