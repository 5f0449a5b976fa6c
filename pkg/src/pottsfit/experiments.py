"""Monte Carlo harness for convergence rates, jump recovery and C_n.

Every replicate draws its noise from a Philox stream keyed by
``base_seed ^ (n_index << 32) ^ replicate``, so tables are reproducible and
independent of execution order.  Errors are measured against the clean
sampled signal (its piecewise-constant embedding), not the analytic function.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .invariants import check_minimizer_bounds
from .metrics import hausdorff, skorokhod
from .potts import Segmentation, fit_gamma
from .selection import (
    SelectionConfig,
    cn_statistic,
    fit_log_rule,
    mr_select,
)
from .signals import NoiseSpec, SignalSpec, add_noise, draw_noise, generate, sigma_for_snr
from .stepfn import embed

__all__ = [
    "RateExperimentConfig",
    "RateExperimentResult",
    "replicate_seed",
    "run_rate",
    "run_recovery",
    "run_figure1",
    "run_cn",
    "fit_loglog",
    "METRICS",
]

METRICS = ("l2", "hausdorff", "skorokhod", "jump_count")
FIGURE1_SIGNALS = ("blocks", "bumps", "heavisine", "doppler")
FIGURE1_SNRS = (7.0, 4.0, 1.0)
# replicates whose seed hashes to 0 mod this get the minimizer invariant check
SPOT_CHECK_EVERY = 20


def replicate_seed(base_seed: int, n_index: int, replicate: int) -> int:
    return (int(base_seed) ^ (int(n_index) << 32) ^ int(replicate)) & 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class RateExperimentConfig:
    """One Monte Carlo sweep over sample sizes.

    ``penalty`` is ``"log"`` (uses ``c_const``), ``"mr"`` (uses ``delta``) or
    ``"fixed"`` (uses ``gamma``).  Set exactly one of ``snr`` and ``sigma``.
    """

    signal: SignalSpec
    n_grid: Tuple[int, ...]
    replicates: int = 50
    snr: Optional[float] = 7.0
    sigma: Optional[float] = None
    noise: str = "gaussian"
    penalty: str = "log"
    c_const: float = 2.5
    delta: float = 0.05
    gamma: Optional[float] = None
    metrics: Tuple[str, ...] = ("l2",)
    base_seed: int = 0
    threads: int = 1
    spot_check: bool = True

    def __post_init__(self):
        ns = list(self.n_grid)
        if len(ns) < 1 or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if min(ns) < 2:
            raise ValueError("sample sizes must be at least 2")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if (self.snr is None) == (self.sigma is None):
            raise ValueError("set exactly one of snr and sigma")
        if self.penalty not in ("log", "mr", "fixed"):
            raise ValueError(f"unknown penalty rule {self.penalty!r}")
        if self.penalty == "fixed" and not (self.gamma and self.gamma > 0):
            raise ValueError("fixed penalty needs gamma > 0")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad or not self.metrics:
            raise ValueError(f"unknown metrics {bad}")
        if any(m in ("hausdorff",) for m in self.metrics) and not self.signal.is_step:
            raise ValueError("hausdorff metric needs a step-function truth")


@dataclass
class RateExperimentResult:
    config: RateExperimentConfig
    raw: List[dict]
    summary: Dict[str, List[dict]]
    slopes: Dict[str, dict]
    invariant_checks: int = 0
    invariant_failures: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_grid": list(self.config.n_grid),
            "replicates": self.config.replicates,
            "summary": self.summary,
            "slopes": self.slopes,
            "invariant_checks": self.invariant_checks,
            "invariant_failures": self.invariant_failures,
        }


def fit_loglog(ns: Sequence[float], values: Sequence[float], ses: Optional[Sequence[float]] = None) -> dict:
    """OLS fit of ``log(value)`` on ``log(n)``; ``slope`` is NaN if any value is not positive.

    ``slope_se`` comes from the regression residuals.  When the standard
    errors ``ses`` of the values are given, ``slope_se_mc`` propagates them
    (delta method) into a Monte Carlo standard error of the slope.
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    out = {"slope": math.nan, "intercept": math.nan, "slope_se": math.nan, "slope_se_mc": math.nan, "defined": False}
    if ns.size < 2 or np.any(values <= 0) or not np.all(np.isfinite(values)):
        return out
    x = np.log(ns)
    z = np.log(values)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, z, rcond=None)
    sxx = float(np.sum((x - x.mean()) ** 2))
    out.update(slope=float(coef[0]), intercept=float(coef[1]), defined=True)
    if ns.size > 2:
        resid = z - A @ coef
        out["slope_se"] = math.sqrt(float(resid @ resid) / (ns.size - 2) / sxx)
    if ses is not None:
        w = (x - x.mean()) / sxx
        out["slope_se_mc"] = float(np.sqrt(np.sum((w * np.asarray(ses, dtype=float) / values) ** 2)))
    return out


def _select_and_fit(y: np.ndarray, cfg: RateExperimentConfig, sigma_true: float):
    if cfg.penalty == "fixed":
        return cfg.gamma, fit_gamma(y, cfg.gamma)
    scfg = SelectionConfig(c_const=cfg.c_const, delta=cfg.delta)
    if cfg.penalty == "log":
        return fit_log_rule(y, scfg)
    sel = mr_select(y, scfg)
    return sel.gamma, sel.fit


def _metric(name: str, fit: Segmentation, clean: np.ndarray, truth_step) -> float:
    if name == "l2":
        return float(np.sqrt(np.mean((fit.fitted() - clean) ** 2)))
    if name == "hausdorff":
        return hausdorff(fit.jump_positions(), truth_step.breakpoints)
    if name == "skorokhod":
        return skorokhod(fit.to_step_function(), truth_step).distance
    return float(fit.n_jumps)


def _one_replicate(cfg: RateExperimentConfig, n_index: int, n: int, rep: int, clean, truth_step, sigma):
    seed = replicate_seed(cfg.base_seed, n_index, rep)
    try:
        y = add_noise(clean, NoiseSpec(cfg.noise, sigma, seed))
        gamma, fit = _select_and_fit(y, cfg, sigma)
        row = {"n": n, "replicate": rep, "seed": seed, "gamma": gamma, "n_jumps": fit.n_jumps}
        for m in cfg.metrics:
            row[m] = _metric(m, fit, clean, truth_step)
        check = None
        if cfg.spot_check and gamma > 0 and math.isfinite(gamma) and seed % SPOT_CHECK_EVERY == 0:
            check = check_minimizer_bounds(y, fit, gamma)
        return row, check
    except Exception as exc:  # noqa: BLE001
        raise RuntimeError(f"replicate failed (n={n}, replicate={rep}, seed={seed}): {exc}") from exc


def _run_grid(cfg: RateExperimentConfig):
    tasks = []
    for ni, n in enumerate(cfg.n_grid):
        clean = generate(cfg.signal.with_n(n))
        sigma = cfg.sigma if cfg.sigma is not None else sigma_for_snr(clean, cfg.snr)
        truth = embed(clean)
        for rep in range(cfg.replicates):
            tasks.append((ni, n, rep, clean, truth, sigma))
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(lambda a: _one_replicate(cfg, *a), tasks))
    else:
        results = [_one_replicate(cfg, *a) for a in tasks]
    rows = [r for r, _ in results]
    checks = [c for _, c in results if c is not None]
    failures = [
        f"n={row['n']} seed={row['seed']}: {c.describe()}"
        for (row, c) in results
        if c is not None and not c.ok
    ]
    return rows, len(checks), failures


def run_rate(cfg: RateExperimentConfig) -> RateExperimentResult:
    """Mean error per sample size and the fitted log-log slope for each metric."""
    rows, n_checks, failures = _run_grid(cfg)
    summary = {}
    slopes = {}
    for m in cfg.metrics:
        per_n = []
        for n in cfg.n_grid:
            vals = np.array([r[m] for r in rows if r["n"] == n])
            se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.nan
            per_n.append({"n": n, "mean": float(vals.mean()), "se": se})
        summary[m] = per_n
        slopes[m] = fit_loglog([p["n"] for p in per_n], [p["mean"] for p in per_n], [p["se"] for p in per_n])
    return RateExperimentResult(cfg, rows, summary, slopes, n_checks, failures)


def run_recovery(cfg: RateExperimentConfig) -> List[dict]:
    """Per sample size: exact jump-count match fraction and Hausdorff error among matches."""
    if not cfg.signal.is_step:
        raise ValueError("jump recovery needs a step-function truth")
    cfg = RateExperimentConfig(
        **{**cfg.__dict__, "metrics": tuple(dict.fromkeys((*cfg.metrics, "hausdorff", "jump_count")))}
    )
    rows, n_checks, failures = _run_grid(cfg)
    table = []
    for n in cfg.n_grid:
        truth_k = embed(generate(cfg.signal.with_n(n))).n_jumps
        sub = [r for r in rows if r["n"] == n]
        matched = [r for r in sub if r["n_jumps"] == truth_k]
        rho = [r["hausdorff"] for r in matched]
        table.append(
            {
                "n": n,
                "true_jumps": truth_k,
                "match_fraction": len(matched) / len(sub),
                "mean_hausdorff": float(np.mean(rho)) if rho else math.nan,
                "mean_n_hausdorff": float(n * np.mean(rho)) if rho else math.nan,
                "invariant_checks": n_checks,
                "invariant_failures": len(failures),
            }
        )
    return table


def run_figure1(
    seed: int,
    n: int = 2048,
    c_const: float = 2.5,
    signals: Sequence[str] = FIGURE1_SIGNALS,
    snrs: Sequence[float] = FIGURE1_SNRS,
) -> Dict[Tuple[str, float], dict]:
    """Clean, noisy and reconstructed signals for each (signal, SNR) cell."""
    bundle = {}
    cfg = SelectionConfig(c_const=c_const)
    for si, name in enumerate(signals):
        clean = generate(SignalSpec(name, n))
        for ri, snr in enumerate(snrs):
            sigma = sigma_for_snr(clean, snr)
            cell_seed = replicate_seed(seed, si, ri)
            noisy = add_noise(clean, NoiseSpec("gaussian", sigma, cell_seed))
            gamma, fit = fit_log_rule(noisy, cfg)
            bundle[(name, snr)] = {
                "clean": clean,
                "noisy": noisy,
                "fit": fit.fitted(),
                "segmentation": fit,
                "gamma": gamma,
                "sigma": sigma,
                "n_jumps": fit.n_jumps,
                "seed": cell_seed,
            }
    return bundle


def run_cn(
    n_grid: Sequence[int],
    family: str = "gaussian",
    replicates: int = 50,
    seed: int = 0,
    sigma: float = 1.0,
    threads: int = 1,
) -> List[dict]:
    """Distribution summaries of the C_n statistic of pure noise."""

    def one(args):
        ni, n, rep = args
        spec = NoiseSpec(family, sigma, replicate_seed(seed, ni, rep))
        return cn_statistic(draw_noise(spec, n)).cn

    table = []
    for ni, n in enumerate(n_grid):
        jobs = [(ni, n, r) for r in range(replicates)]
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                vals = np.array(list(pool.map(one, jobs)))
        else:
            vals = np.array([one(j) for j in jobs])
        beta = NoiseSpec(family, sigma).beta
        table.append(
            {
                "n": n,
                "family": family,
                "sigma": sigma,
                "beta": beta,
                "median": float(np.median(vals)),
                "mean": float(vals.mean()),
                "q05": float(np.quantile(vals, 0.05)),
                "q95": float(np.quantile(vals, 0.95)),
                "max": float(vals.max()),
                "values": vals.tolist(),
            }
        )
    return table
