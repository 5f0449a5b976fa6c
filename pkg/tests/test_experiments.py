import math

import numpy as np
import pytest

import pottsfit.experiments as ex
from pottsfit.experiments import (
    RateExperimentConfig,
    fit_loglog,
    replicate_seed,
    run_cn,
    run_figure1,
    run_rate,
    run_recovery,
)
from pottsfit.signals import SignalSpec

STEP = SignalSpec("step", 2)


def config(**kw):
    base = dict(signal=STEP, n_grid=(128, 256), replicates=3, base_seed=5)
    base.update(kw)
    return RateExperimentConfig(**base)


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            {"n_grid": (256, 128)},
            {"n_grid": (1, 4)},
            {"replicates": 0},
            {"snr": None},
            {"snr": 7.0, "sigma": 1.0},
            {"penalty": "cv"},
            {"penalty": "fixed"},
            {"metrics": ("l1",)},
            {"signal": SignalSpec("holder", 2), "metrics": ("hausdorff",)},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            config(**kw)

    def test_seed_scheme(self):
        assert replicate_seed(7, 0, 3) == 7 ^ 3
        assert replicate_seed(7, 2, 3) == 7 ^ (2 << 32) ^ 3


class TestLogLog:
    def test_exact_power(self):
        ns = np.array([100, 200, 400, 800])
        fit = fit_loglog(ns, 3 * ns**-0.5)
        assert fit["slope"] == pytest.approx(-0.5) and fit["defined"]
        assert fit["slope_se"] == pytest.approx(0.0, abs=1e-9)

    def test_monte_carlo_se(self):
        # equal relative errors r at two points give se = r * sqrt(2) / |log ratio|
        fit = fit_loglog([100, 400], [1.0, 0.5], [0.1, 0.05])
        assert fit["slope_se_mc"] == pytest.approx(0.1 * math.sqrt(2) / math.log(4))

    def test_zero_values_undefined(self):
        fit = fit_loglog([10, 20], [0.0, 0.0])
        assert not fit["defined"] and math.isnan(fit["slope"])


class TestRate:
    def test_noiseless_is_exact(self):
        res = run_rate(config(snr=None, sigma=0.0, metrics=("l2", "skorokhod", "hausdorff"), replicates=1))
        assert all(r["l2"] == 0 and r["skorokhod"] == 0 and r["hausdorff"] == 0 for r in res.raw)
        assert not res.slopes["l2"]["defined"]

    def test_table_shape_and_order(self):
        res = run_rate(config(metrics=("l2", "jump_count")))
        assert len(res.raw) == 6
        assert [(r["n"], r["replicate"]) for r in res.raw] == [(n, k) for n in (128, 256) for k in range(3)]
        assert set(res.summary) == {"l2", "jump_count"}

    def test_deterministic(self):
        a = run_rate(config(metrics=("l2", "skorokhod")))
        b = run_rate(config(metrics=("l2", "skorokhod")))
        assert a.raw == b.raw and a.slopes == b.slopes

    def test_threads_do_not_change_results(self):
        a = run_rate(config())
        b = run_rate(config(threads=2))
        assert a.raw == b.raw

    @pytest.mark.parametrize("penalty,extra", [("mr", {}), ("fixed", {"gamma": 0.05})])
    def test_other_penalties(self, penalty, extra):
        res = run_rate(config(penalty=penalty, **extra))
        assert all(r["l2"] >= 0 for r in res.raw)
        if penalty == "fixed":
            assert all(r["gamma"] == 0.05 for r in res.raw)

    def test_spot_checks_pass(self):
        res = run_rate(config(replicates=40, n_grid=(256,)))
        assert res.invariant_checks >= 1 and res.invariant_failures == []

    def test_failure_reports_seed(self, monkeypatch):
        def boom(*a, **k):
            raise FloatingPointError("bad")

        monkeypatch.setattr(ex, "_select_and_fit", boom)
        with pytest.raises(RuntimeError, match=r"seed=\d+"):
            run_rate(config())

    def test_slope_stability(self):
        grid = (256, 512, 1024, 2048, 4096)
        a = run_rate(config(n_grid=grid, replicates=25)).slopes["l2"]
        b = run_rate(config(n_grid=grid, replicates=50)).slopes["l2"]
        assert abs(a["slope"] - b["slope"]) < a["slope_se_mc"]


class TestRecovery:
    def test_noiseless(self):
        table = run_recovery(config(snr=None, sigma=0.0, n_grid=(100, 1000), replicates=1))
        for row in table:
            assert row["match_fraction"] == 1 and row["mean_hausdorff"] <= 1 / row["n"]

    def test_hausdorff_decreases_with_n(self):
        table = run_recovery(config(n_grid=(1024, 4096, 16384), replicates=20))
        rho = [row["mean_hausdorff"] for row in table]
        assert rho[0] > rho[1] > rho[2]

    def test_requires_step_truth(self):
        with pytest.raises(ValueError):
            run_recovery(config(signal=SignalSpec("holder", 2)))


class TestFigure1:
    def test_bundle_shape(self):
        bundle = run_figure1(seed=1, n=256)
        assert len(bundle) == 12
        cell = bundle[("blocks", 7.0)]
        assert len(cell["clean"]) == len(cell["noisy"]) == len(cell["fit"]) == 256

    def test_heavisine_loses_detail_at_low_snr(self):
        counts = {7.0: [], 1.0: []}
        for seed in range(10):
            bundle = run_figure1(seed, signals=("heavisine",), snrs=(7.0, 1.0))
            for snr in counts:
                counts[snr].append(bundle[("heavisine", snr)]["n_jumps"])
        assert np.mean(counts[1.0]) < np.mean(counts[7.0])


class TestCn:
    def test_table(self):
        table = run_cn([200, 400], replicates=5, seed=1)
        assert [row["n"] for row in table] == [200, 400]
        assert all(row["q05"] <= row["median"] <= row["q95"] <= row["max"] for row in table)

    def test_rademacher_below_ceiling(self):
        row = run_cn([20_000], family="rademacher", replicates=20, seed=3)[0]
        assert row["median"] <= 6 * row["beta"] * 1.1

    def test_deterministic(self):
        assert run_cn([300], replicates=4, seed=2) == run_cn([300], replicates=4, seed=2)
