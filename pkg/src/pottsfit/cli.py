"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional


from . import experiments, io, metrics, potts, selection, signals
from .stepfn import l2_distance

EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _sigma_method(text: str):
    if text in ("mad", "mad_diff"):
        return "mad_diff"
    if text in ("msd", "mean_sq_diff"):
        return "mean_sq_diff"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--sigma must be mad, msd or a number") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError("--sigma must be non-negative")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _selection_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c-const", type=_positive, default=2.5)
    p.add_argument("--delta", type=_positive, default=0.05)
    p.add_argument("--sigma", type=_sigma_method, default="mad_diff")
    p.add_argument("--mr-family", choices=("all", "dyadic"), default="all")


def _selection_config(args) -> selection.SelectionConfig:
    return selection.SelectionConfig(
        c_const=args.c_const,
        delta=args.delta,
        interval_family=args.mr_family,
        sigma_method=args.sigma,
    )


def cmd_fit(args) -> int:
    y = io.read_signal_csv(args.input)
    if args.gamma is not None:
        gamma, fit = args.gamma, potts.fit_gamma(y, args.gamma)
        extra = {}
    elif args.select == "mr":
        sel = selection.mr_select(y, _selection_config(args))
        gamma, fit = sel.gamma, sel.fit
        extra = {"mr_passed": sel.passed, "sigma_hat": sel.sigma, "threshold": sel.threshold}
    else:
        cfg = _selection_config(args)
        gamma, fit = selection.fit_log_rule(y, cfg)
        extra = {"sigma_hat": selection.estimate_sigma(y, cfg.sigma_method)}
    record = fit.to_dict(gamma)
    record.update(extra)
    _emit(io.dumps(record), args.out)
    if args.fitted_out:
        io.write_signal_csv(fit.fitted(), args.fitted_out)
    return 0


def cmd_path(args) -> int:
    y = io.read_signal_csv(args.input)
    n = y.size
    if n < 2:
        raise io.DataError("a path needs at least two samples")
    k_max = args.k_max
    if k_max is None:
        k_max = n - 1 if args.full else potts.default_k_max(n)
    if not 1 <= k_max <= n - 1:
        raise UsageError(f"--k-max must be in [1, {n - 1}]")
    path = potts.solve_path(y, k_max)
    record = path.to_dict()
    record["complete"] = path.complete
    _emit(io.dumps(record), args.out)
    return 0


def cmd_select(args) -> int:
    y = io.read_signal_csv(args.input)
    cfg = _selection_config(args)
    g_log, fit_log = selection.fit_log_rule(y, cfg)
    sel = selection.mr_select(y, cfg)
    record = {
        "n": y.size,
        "sigma_hat": selection.estimate_sigma(y, cfg.sigma_method),
        "log_rule": fit_log.to_dict(g_log),
        "mr": {**sel.fit.to_dict(sel.gamma), "passed": sel.passed, "threshold": sel.threshold},
        "same_jumps": fit_log.jumps == sel.fit.jumps,
    }
    _emit(io.dumps(record), args.out)
    return 0


def cmd_signal(args) -> int:
    spec = signals.SignalSpec(
        args.family,
        args.n,
        jumps=tuple(args.jumps) if args.jumps is not None else signals.DEFAULT_STEP["jumps"],
        levels=tuple(args.levels) if args.levels is not None else signals.DEFAULT_STEP["levels"],
        alpha=args.alpha,
    )
    clean = signals.generate(spec)
    if args.clean:
        _emit(io.write_signal_csv(clean), args.out)
        return 0
    if args.seed is None:
        raise UsageError("noisy output needs an explicit --seed")
    if (args.snr is None) == (args.noise_sigma is None):
        raise UsageError("give exactly one of --snr and --noise-sigma")
    sigma = args.noise_sigma if args.noise_sigma is not None else signals.sigma_for_snr(clean, args.snr)
    noisy = signals.add_noise(clean, signals.NoiseSpec(args.noise, sigma, args.seed))
    _emit(io.write_signal_csv(noisy), args.out)
    return 0


def cmd_metrics(args) -> int:
    f = io.read_step_function(args.file_a)
    g = io.read_step_function(args.file_b)
    wanted = [m for m in ("l2", "hausdorff", "skorokhod", "sup") if getattr(args, m)]
    if not wanted:
        wanted = ["l2", "hausdorff", "skorokhod", "sup"]
    record = {}
    for m in wanted:
        if m == "l2":
            record["l2"] = l2_distance(f, g)
        elif m == "hausdorff":
            record["hausdorff"] = metrics.hausdorff(f.breakpoints, g.breakpoints)
        elif m == "sup":
            record["sup"] = metrics.sup_distance(f, g)
        else:
            res = metrics.skorokhod(f, g)
            record["skorokhod"] = res.distance
            record["skorokhod_matching"] = [list(p) for p in res.matching]
    _emit(io.dumps(record), args.out)
    return 0


def _signal_spec(args, n: int = 2) -> signals.SignalSpec:
    return signals.SignalSpec(
        args.signal,
        n,
        jumps=tuple(args.jumps) if args.jumps is not None else signals.DEFAULT_STEP["jumps"],
        levels=tuple(args.levels) if args.levels is not None else signals.DEFAULT_STEP["levels"],
        alpha=args.alpha,
    )


def _rate_config(args, metrics_default=("l2",)) -> experiments.RateExperimentConfig:
    if args.seed is None:
        raise UsageError("benchmarks need an explicit --seed")
    snr = args.snr
    if args.noise_sigma is not None:
        snr = None
    return experiments.RateExperimentConfig(
        signal=_signal_spec(args),
        n_grid=tuple(args.ns),
        replicates=args.reps,
        snr=snr,
        sigma=args.noise_sigma,
        noise=args.noise,
        penalty=args.penalty,
        c_const=args.c_const,
        delta=args.delta,
        gamma=args.gamma,
        metrics=tuple(args.metric) if args.metric else metrics_default,
        base_seed=args.seed,
        threads=args.threads,
    )


def cmd_bench_rates(args) -> int:
    res = experiments.run_rate(_rate_config(args))
    if args.format == "json":
        _emit(io.dumps(res.to_dict()), args.out)
    else:
        _emit(io.table_to_csv(res.raw), args.out)
    if args.summary:
        Path(args.summary).write_text(io.dumps(res.to_dict()))
    return 0


def cmd_bench_recovery(args) -> int:
    table = experiments.run_recovery(_rate_config(args))
    _emit(io.dumps(table) if args.format == "json" else io.table_to_csv(table), args.out)
    return 0


def cmd_bench_cn(args) -> int:
    if args.seed is None:
        raise UsageError("benchmarks need an explicit --seed")
    table = experiments.run_cn(
        args.ns, family=args.noise, replicates=args.reps, seed=args.seed, sigma=args.noise_sigma, threads=args.threads
    )
    if args.format == "json":
        _emit(io.dumps(table), args.out)
    else:
        rows = [{k: v for k, v in r.items() if k != "values"} for r in table]
        _emit(io.table_to_csv(rows), args.out)
    return 0


def cmd_figure1(args) -> int:
    if args.seed is None:
        raise UsageError("figure1 needs an explicit --seed")
    bundle = experiments.run_figure1(args.seed, n=args.n, c_const=args.c_const)
    rows = []
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for (name, snr), cell in bundle.items():
        rows.append({"signal": name, "snr": snr, "sigma": cell["sigma"], "gamma": cell["gamma"], "n_jumps": cell["n_jumps"]})
        if out_dir:
            triplets = [
                {"clean": c, "noisy": y, "fit": u} for c, y, u in zip(cell["clean"], cell["noisy"], cell["fit"])
            ]
            (out_dir / f"{name}_snr{snr:g}.csv").write_text(io.table_to_csv(triplets))
    _emit(io.dumps(rows) if args.format == "json" else io.table_to_csv(rows), args.out)
    return 0


def _bench_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--signal", choices=signals.FAMILIES, default="step")
    p.add_argument("--jumps", type=_floats)
    p.add_argument("--levels", type=_floats)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--ns", type=_ints, required=True)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--snr", type=_positive, default=7.0)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--noise", choices=signals.NOISE_FAMILIES, default="gaussian")
    p.add_argument("--penalty", choices=("log", "mr", "fixed"), default="log")
    p.add_argument("--gamma", type=_positive)
    p.add_argument("--metric", type=lambda s: s.split(","))
    p.add_argument("--c-const", type=_positive, default=2.5)
    p.add_argument("--delta", type=_positive, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pottsfit", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="fit a Potts minimizer")
    p.add_argument("input")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=_positive)
    g.add_argument("--select", choices=("log", "mr"), default="log")
    _selection_args(p)
    p.add_argument("--fitted-out", help="write fitted values as CSV")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("path", parents=[common], help="solution path over all gamma")
    p.add_argument("input")
    p.add_argument("--k-max", type=int)
    p.add_argument("--full", action="store_true", help="use k_max = n - 1")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("select", parents=[common], help="compare log-rule and MR selection")
    p.add_argument("input")
    _selection_args(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("signal", parents=[common], help="generate a test signal")
    p.add_argument("--family", choices=signals.FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--jumps", type=_floats)
    p.add_argument("--levels", type=_floats)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--snr", type=_positive)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--noise", choices=signals.NOISE_FAMILIES, default="gaussian")
    p.add_argument("--clean", action="store_true")
    p.set_defaults(func=cmd_signal)

    p = sub.add_parser("metrics", parents=[common], help="distances between two step functions")
    p.add_argument("--l2", action="store_true")
    p.add_argument("--hausdorff", action="store_true")
    p.add_argument("--skorokhod", action="store_true")
    p.add_argument("--sup", action="store_true")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench-rates", parents=[common], help="convergence-rate Monte Carlo")
    _bench_args(p)
    p.add_argument("--summary", help="also write the JSON summary here")
    p.set_defaults(func=cmd_bench_rates)

    p = sub.add_parser("bench-recovery", parents=[common], help="jump-recovery Monte Carlo")
    _bench_args(p)
    p.set_defaults(func=cmd_bench_recovery)

    p = sub.add_parser("bench-cn", parents=[common], help="C_n statistic of pure noise")
    p.add_argument("--ns", type=_ints, required=True)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--noise", choices=signals.NOISE_FAMILIES, default="gaussian")
    p.add_argument("--noise-sigma", type=float, default=1.0)
    p.set_defaults(func=cmd_bench_cn)

    p = sub.add_parser("figure1", parents=[common], help="reconstructions of the four test signals")
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--c-const", type=_positive, default=2.5)
    p.add_argument("--out-dir", help="write one clean,noisy,fit CSV per cell here")
    p.set_defaults(func=cmd_figure1)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    out = getattr(args, "out", None)
    if out and not Path(out).resolve().parent.is_dir():
        parser.error(f"output directory for {out} does not exist")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (io.DataError, ValueError) as exc:
        print(f"pottsfit: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
