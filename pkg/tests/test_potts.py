import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exhaustive_potts
from pottsfit.invariants import check_minimizer_bounds
from pottsfit.potts import (
    PrefixMoments,
    Segmentation,
    brute_force_fit,
    default_k_max,
    fit_gamma,
    fit_k,
    gamma_walk,
    knot_below,
    interpolate,
    segment_cost,
    solve_path,
)

small_signals = st.lists(st.integers(-4, 4).map(float), min_size=1, max_size=10)
gammas = st.floats(1e-3, 5.0)


class TestSegmentCost:
    @pytest.mark.parametrize("y,i,j,cost", [([5], 1, 1, 0.0), ([0, 1], 1, 2, 0.5), ([2, 2, 2], 1, 3, 0.0)])
    def test_examples(self, y, i, j, cost):
        assert segment_cost(PrefixMoments.from_signal(y), i, j) == pytest.approx(cost, abs=1e-15)

    @pytest.mark.parametrize("i,j", [(0, 1), (2, 1), (1, 4)])
    def test_out_of_range(self, i, j):
        with pytest.raises(ValueError):
            segment_cost(PrefixMoments.from_signal([1, 2, 3]), i, j)

    def test_large_offset_cancellation(self):
        y = 1e8 + np.array([0.0, 1.0])
        assert segment_cost(PrefixMoments.from_signal(y), 1, 2) == pytest.approx(0.5, rel=1e-9)


class TestFitK:
    def test_step(self):
        s = fit_k([0, 0, 1, 1], 1)
        assert s.jumps == (2,) and s.levels == (0, 1) and s.rss == 0

    def test_tie_lexicographic(self):
        s = fit_k([1, 2, 3], 1)
        assert s.jumps == (1,) and s.levels == pytest.approx((1, 2.5)) and s.rss == pytest.approx(0.5)

    def test_k_zero_is_mean(self):
        s = fit_k([1, 2, 6], 0)
        assert s.jumps == () and s.levels == pytest.approx((3.0,))

    def test_fewest_jumps_at_minimum(self):
        assert fit_k([0, 0, 1, 1], 3).jumps == (2,)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            fit_k([1, 2, 3], 3)


class TestFitGamma:
    def test_examples(self):
        s = fit_gamma([0, 0, 1, 1], 0.1)
        assert s.jumps == (2,) and s.levels == (0, 1) and s.h_value(0.1) == pytest.approx(0.1)
        s = fit_gamma([0, 0, 1, 1], 0.3)
        assert s.jumps == () and s.levels == (0.5,) and s.h_value(0.3) == pytest.approx(0.25)

    def test_constant(self):
        s = fit_gamma([4, 4, 4, 4], 0.01)
        assert s.jumps == () and s.h_value(0.01) == 0

    @pytest.mark.parametrize("gamma", [0.0, -1.0])
    def test_nonpositive_gamma(self, gamma):
        with pytest.raises(ValueError):
            fit_gamma([0, 1], gamma)

    def test_rss_matches_levels(self):
        y = np.random.default_rng(0).normal(size=200)
        s = fit_gamma(y, 0.01)
        assert s.rss == pytest.approx(float(np.sum((y - s.fitted()) ** 2)), rel=1e-9)
        for (a, b), lv in zip(s.bounds, s.levels):
            assert lv == pytest.approx(y[a:b].mean(), rel=1e-12, abs=1e-12)

    @given(small_signals, gammas)
    @settings(max_examples=200, deadline=None)
    def test_matches_exhaustive_oracle(self, y, gamma):
        fit = fit_gamma(y, gamma)
        table = exhaustive_potts(y, gamma)
        best = min(h for h, _, _ in table)
        assert fit.h_value(gamma) == pytest.approx(best, abs=1e-9)
        tol = 1e-9
        winners = sorted((k, j) for h, k, j in table if h <= best + tol)
        assert fit.jumps == winners[0][1]

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=40), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_jump_count_monotone(self, y, g1, g2):
        lo, hi = sorted((g1, g2))
        assert fit_gamma(y, lo).n_jumps >= fit_gamma(y, hi).n_jumps

    @given(st.lists(st.integers(-5, 5).map(float), min_size=2, max_size=30), st.integers(-100, 100), gammas)
    @settings(max_examples=60, deadline=None)
    def test_shift_equivariance(self, y, c, gamma):
        a, b = fit_gamma(y, gamma), fit_gamma(np.array(y) + c, gamma)
        assert a.jumps == b.jumps
        assert np.allclose(np.array(a.levels) + c, b.levels, atol=1e-9)

    @given(
        st.lists(st.integers(-5, 5).map(float), min_size=2, max_size=30),
        st.sampled_from([-3.0, -0.5, 0.25, 2.0, 8.0]),
        gammas,
    )
    @settings(max_examples=60, deadline=None)
    def test_scale_equivariance(self, y, a, gamma):
        f1, f2 = fit_gamma(y, gamma), fit_gamma(a * np.array(y), a * a * gamma)
        assert f1.jumps == f2.jumps
        assert np.allclose(a * np.array(f1.levels), f2.levels, atol=1e-9)

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=60), st.floats(1e-3, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_a_priori_inequalities(self, y, gamma):
        check = check_minimizer_bounds(y, fit_gamma(y, gamma), gamma)
        assert check.ok, check.describe()


class TestInterpolate:
    def test_merges_equal_neighbours(self):
        s = interpolate([1, 1, 2, 2, 2, 0])
        assert s.jumps == (2, 5) and s.rss == 0


class TestPath:
    def test_two_point_hull(self):
        p = solve_path([0, 0, 1, 1], 3)
        assert p.rss[0] == pytest.approx(1.0) and p.rss[1] == 0
        assert p.knots == pytest.approx([0.25])
        assert p.optimal_k(0.25) == 0 and p.optimal_k(0.2499) == 1
        assert p.gamma_interval(0) == (pytest.approx(0.25), math.inf)

    def test_constant_single_entry(self):
        p = solve_path([2.0] * 6)
        assert p.ks == [0] and p.knots == [] and p.optimal_k(1e-9) == 0

    def test_k_max_validation(self):
        with pytest.raises(ValueError):
            solve_path([0, 1, 2], 0)
        with pytest.raises(ValueError):
            solve_path([0, 1, 2], 3)

    def test_default_k_max(self):
        assert default_k_max(2) == 1 and default_k_max(10) == 5 and default_k_max(11) == 6

    def test_predicted_h_matches_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            y = rng.normal(size=10)
            p = solve_path(y, 9)
            for gamma in np.logspace(-3, 0.5, 20):
                assert p.predicted_h(gamma) == pytest.approx(brute_force_fit(y, gamma).h_value(gamma), abs=1e-9)

    def test_rss_matches_fit_k(self):
        y = np.random.default_rng(11).normal(size=40)
        p = solve_path(y, 20)
        for k in p.ks:
            assert p.rss[k] == pytest.approx(fit_k(y, k).rss, rel=1e-9, abs=1e-12)

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=25))
    @settings(max_examples=40, deadline=None)
    def test_path_invariants(self, y):
        p = solve_path(y, len(y) - 1)
        rss = np.array(p.rss)
        assert np.all(np.diff(rss) <= 1e-9)
        assert all(a > b for a, b in zip(p.knots, p.knots[1:]))
        # hull points lie on the lower convex hull of (k, rss_k / n)
        pts = [(k, rss[k] / p.n) for k in p.ks]
        for k0, k1 in zip(p.hull, p.hull[1:]):
            slope = (pts[k1][1] - pts[k0][1]) / (k1 - k0)
            for k, v in pts:
                assert v >= pts[k0][1] + slope * (k - k0) - 1e-9
        for gamma in np.logspace(-3, 1, 15):
            assert fit_gamma(y, gamma).h_value(gamma) == pytest.approx(p.predicted_h(gamma), abs=1e-9)

    def test_json_shape(self):
        d = solve_path([0, 0, 1, 1], 3).to_dict()
        assert d["knots"] == [{"gamma": pytest.approx(0.25), "k": 1}]


class TestBruteForce:
    def test_same_as_fit_gamma(self):
        assert brute_force_fit([0, 0, 1, 1], 0.1) == fit_gamma([0, 0, 1, 1], 0.1)

    def test_single_sample(self):
        s = brute_force_fit([7.0], 0.5)
        assert s.jumps == () and s.levels == (7.0,)

    def test_two_candidates(self):
        s = brute_force_fit([0, 1], 0.6)
        assert s.jumps == () and s.levels == (0.5,)

    def test_refuses_large_n(self):
        with pytest.raises(ValueError):
            brute_force_fit(np.zeros(21), 0.1)


def test_segmentation_from_jumps_validates():
    with pytest.raises(ValueError):
        Segmentation.from_jumps([1, 2, 3], [2, 2])


class TestGammaWalk:
    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=25))
    @settings(max_examples=60, deadline=None)
    def test_matches_path_hull(self, y):
        p = solve_path(y, len(y) - 1)
        walk = list(gamma_walk(y))
        assert [f.n_jumps for _, f in walk] == p.hull
        assert [u for u, _ in walk[1:]] == pytest.approx(p.knots, rel=1e-9)
        for _, f in walk:
            assert f.jumps == p.jumps[f.n_jumps]

    def test_k_max_stops_walk(self):
        y = np.random.default_rng(4).normal(size=40)
        assert max(f.n_jumps for _, f in gamma_walk(y, 3)) <= 3

    def test_knot_of_step(self):
        y = [0, 0, 1, 1]
        assert knot_below(y, fit_gamma(y, 1.0)) == pytest.approx(0.25)
        assert knot_below(y, fit_gamma(y, 0.1)) is None
