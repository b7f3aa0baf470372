import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medquant.medci import (
    ConfidenceInterval,
    Method,
    Sample,
    coverage_lower_bound,
    exact_order_indices,
    hoeffding_order_indices,
    median_ci_exact,
    median_ci_hoeffding,
    quantile_coverage_bound,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def guilbaud_exact(n, r, s):
    return Fraction(sum(math.comb(n, i) for i in range(r, s)), 2**n)


class TestSample:
    def test_sorted_and_readonly(self):
        s = Sample([3, 1, 2])
        assert list(s.values) == [1, 2, 3]
        with pytest.raises(ValueError):
            s.values[0] = 5

    def test_rejects(self):
        with pytest.raises(ValueError):
            Sample([])
        with pytest.raises(ValueError):
            Sample([1.0, float("nan")])

    def test_order_stat_out_of_range(self):
        s = Sample([1.0, 2.0])
        assert s.order_stat(0) == -math.inf and s.order_stat(3) == math.inf

    def test_lower_median(self):
        assert Sample([1, 2, 3, 4]).lower_median() == 2
        assert Sample([1, 2, 3, 4, 5]).lower_median() == 3


class TestInterval:
    def test_rejects_inverted(self):
        with pytest.raises(ValueError):
            ConfidenceInterval(2.0, 1.0, 0.05, Method.EXACT)

    def test_to_dict_infinities(self):
        d = ConfidenceInterval(-math.inf, math.inf, 0.05, Method.EXACT).to_dict()
        assert d["lower"] == "-inf" and d["upper"] == "+inf" and d["width"] == "+inf"


class TestExact:
    def test_n6(self):
        x = [0.3, -1.2, 5.0, 2.2, 0.0, 1.1]
        ci = median_ci_exact(Sample(x), 0.05)
        assert (ci.lower, ci.upper, ci.order_indices) == (-1.2, 5.0, (1, 6))
        assert ci.method is Method.EXACT

    def test_n5_trivial(self):
        ci = median_ci_exact(Sample(range(5)), 0.05)
        assert ci.lower == -math.inf and ci.upper == math.inf and ci.order_indices is None

    def test_n100(self):
        x = np.arange(100.0)
        ci = median_ci_exact(Sample(x), 0.05)
        assert ci.order_indices == (40, 61)
        assert (ci.lower, ci.upper) == (39.0, 60.0)

    def test_rejects(self):
        with pytest.raises(ValueError):
            median_ci_exact(Sample([1.0]), 1.0)

    @given(st.integers(1, 3000), st.sampled_from([0.01, 0.05, 0.1, 0.3]))
    @settings(max_examples=200, deadline=None)
    def test_indices_valid(self, n, alpha):
        idx = exact_order_indices(n, alpha)
        if idx is None:
            assert 2**n * alpha < 2
        else:
            r, s = idx
            assert 1 <= r < s <= n
            assert coverage_lower_bound(n, r, s) >= 1 - alpha - 1e-12

    @given(st.lists(finite, min_size=1, max_size=80), st.sampled_from([0.05, 0.1, 0.5]), st.randoms())
    def test_permutation_invariance(self, xs, alpha, rnd):
        ys = list(xs)
        rnd.shuffle(ys)
        assert median_ci_exact(Sample(xs), alpha) == median_ci_exact(Sample(ys), alpha)

    @given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=6, max_size=80))
    def test_monotone_equivariance(self, xs):
        a = median_ci_exact(Sample(xs), 0.05)

        def g(v):
            return np.exp(np.asarray(v, dtype=float)) * 3.0 + 1.0

        b = median_ci_exact(Sample(g(xs)), 0.05)
        assert b.lower == g(a.lower) and b.upper == g(a.upper)

    @pytest.mark.parametrize("n", [8, 31, 100])
    def test_mc_coverage_matches_guilbaud(self, n):
        reps = 10_000
        rng = np.random.default_rng(20240611 + n)
        x = np.sort(rng.standard_cauchy((reps, n)), axis=1)
        r, s = exact_order_indices(n, 0.05)
        hit = (x[:, r - 1] <= 0.0) & (0.0 <= x[:, s - 1])
        p = coverage_lower_bound(n, r, s)
        se = math.sqrt(p * (1 - p) / reps)
        assert abs(hit.mean() - p) <= 3 * se

    def test_mc_coverage_with_atom(self):
        # half the mass sits exactly at the median
        reps, n = 10_000, 40
        rng = np.random.default_rng(7)
        x = np.where(rng.random((reps, n)) < 0.5, 0.0, rng.normal(size=(reps, n)))
        x.sort(axis=1)
        r, s = exact_order_indices(n, 0.05)
        hit = (x[:, r - 1] <= 0.0) & (0.0 <= x[:, s - 1])
        se = math.sqrt(0.05 * 0.95 / reps)
        assert hit.mean() >= 0.95 - 3 * se


class TestHoeffding:
    def test_n100(self):
        ci = median_ci_hoeffding(Sample(np.arange(1.0, 101.0)), 0.05)
        assert ci.order_indices == (37, 64)
        assert (ci.lower, ci.upper) == (37.0, 64.0)

    def test_n4_real_line(self):
        ci = median_ci_hoeffding(Sample([1, 2, 3, 4]), 0.05)
        assert ci.lower == -math.inf and ci.upper == math.inf

    def test_n9_half(self):
        ci = median_ci_hoeffding(Sample(np.arange(1.0, 10.0)), 0.5)
        assert ci.order_indices == (3, 7) and (ci.lower, ci.upper) == (3.0, 7.0)

    @pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1])
    def test_contains_exact_band(self, alpha):
        for n in range(1, 2001):
            rh, sh = hoeffding_order_indices(n, alpha)
            idx = exact_order_indices(n, alpha)
            if idx is None:
                continue
            r, s = idx
            assert rh <= r and sh >= s, n


class TestCoverageFormulas:
    def test_examples(self):
        assert coverage_lower_bound(6, 1, 6) == pytest.approx(0.96875, abs=1e-15)
        assert coverage_lower_bound(3, 1, 3) == pytest.approx(0.75, abs=1e-15)
        assert coverage_lower_bound(2, 1, 2) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("r,s", [(0, 3), (3, 3), (4, 2), (1, 8)])
    def test_rejects(self, r, s):
        with pytest.raises(ValueError):
            coverage_lower_bound(6, r, s)

    @given(st.integers(1, 150), st.data())
    def test_against_exact_sum(self, n, data):
        r = data.draw(st.integers(1, n))
        s = data.draw(st.integers(r + 1, n + 1))
        assert coverage_lower_bound(n, r, s) == pytest.approx(float(guilbaud_exact(n, r, s)), abs=1e-13)

    def test_quantile_bound(self):
        assert quantile_coverage_bound(10, 0.05, 0.0) == 0.95
        want = 1 - 0.05 - 2 * 0.05 * 90 * 1.02**8 * 1e-4
        assert quantile_coverage_bound(10, 0.05, 0.01) == pytest.approx(want, rel=1e-14)
        assert quantile_coverage_bound(10, 0.05, 0.01) == pytest.approx(0.94895, abs=1e-5)
        assert quantile_coverage_bound(100, 0.05, 0.1) < 0

    @pytest.mark.parametrize("eps", [-0.01, 0.5, 0.7])
    def test_quantile_bound_rejects(self, eps):
        with pytest.raises(ValueError):
            quantile_coverage_bound(10, 0.05, eps)
