import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclia.dyadic import (DyadicInterval, DyadicMartingale, SmoothnessSequence,
                           common_ancestor, exp_moment, martingale_from_measure,
                           max_square, smoothness_check, square_function,
                           tail_distribution)
from cyclia.measures import atomic, kahane_smooth, lebesgue
from cyclia.profiles import LogPower


class TestDyadicInterval:
    def test_geometry(self):
        I = DyadicInterval(3, 5)
        assert I.left == 5 / 8 and I.right == 6 / 8 and I.length == 1 / 8

    def test_children_partition_parent(self):
        I = DyadicInterval(4, 11)
        a, b = I.children()
        assert a.left == I.left and b.right == I.right and a.right == b.left
        assert a.parent() == I and b.parent() == I

    def test_root_has_no_parent(self):
        with pytest.raises(ValueError):
            DyadicInterval(0, 0).parent()

    def test_index_range_validated(self):
        with pytest.raises(ValueError):
            DyadicInterval(2, 4)
        with pytest.raises(ValueError):
            DyadicInterval(-1, 0)

    def test_contains_wraps_mod_one(self):
        I = DyadicInterval(2, 0)
        assert I.contains(0.1) and I.contains(1.1) and not I.contains(0.3)

    @given(st.integers(0, 10), st.data())
    def test_common_ancestor_contains_both(self, n, data):
        j1 = data.draw(st.integers(0, 2**n - 1))
        j2 = data.draw(st.integers(0, 2**n - 1))
        a, b = DyadicInterval(n, j1), DyadicInterval(n, j2)
        anc = common_ancestor(a, b)
        assert anc.contains(a.left) and anc.contains(b.left)
        assert anc.n <= n

    def test_seam_adjacent_cells_share_only_root(self):
        a = DyadicInterval(3, 7)
        b = DyadicInterval(3, 0)
        assert common_ancestor(a, b) == DyadicInterval(0, 0)


class TestMartingale:
    def test_mean_value_enforced(self):
        with pytest.raises(ValueError, match="mean-value"):
            DyadicMartingale([np.array([1.0]), np.array([0.0, 3.0])])

    def test_from_leaves_round_trip(self):
        leaves = np.arange(16.0)
        m = DyadicMartingale.from_leaves(leaves)
        assert m.depth == 4
        assert m.root_value == leaves.mean()
        assert m.value(DyadicInterval(4, 3)) == 3.0
        assert m.value_at(2, 0.95) == leaves[12:16].mean()

    def test_measure_martingale_values_are_averaged_density(self):
        mu = atomic([(0.3, 2.0)])
        m = martingale_from_measure(mu, 6)
        I = DyadicInterval(6, int(0.3 * 64))
        assert m.value(I) == pytest.approx(2.0 * 64)
        assert m.root_value == pytest.approx(2.0)

    def test_lebesgue_martingale_constant(self):
        m = martingale_from_measure(lebesgue(), 10)
        for lv in m.levels:
            assert np.allclose(lv, 1.0)
        assert max_square(m, 10) == 0.0

    def test_square_function_single_jump(self):
        # one +-h increment at generation 1, constants afterwards
        h = 0.25
        m = DyadicMartingale([np.array([1.0]), np.array([1 - h, 1 + h])])
        assert square_function(m, 1, 0.1) == pytest.approx(h)
        assert max_square(m, 1) == pytest.approx(h)

    def test_square_function_accumulates_in_quadrature(self):
        rng = np.random.default_rng(5)
        leaves = 1.0 + 0.01 * rng.standard_normal(2**8)
        m = DyadicMartingale.from_leaves(leaves)
        x = 0.37
        manual = 0.0
        for n in range(1, 9):
            manual += (m.value_at(n, x) - m.value_at(n - 1, x)) ** 2
        assert square_function(m, 8, x) == pytest.approx(math.sqrt(manual))

    def test_tail_distribution_counts_cells(self):
        m = DyadicMartingale([np.array([0.0]), np.array([-1.0, 1.0]),
                              np.array([-1.5, -0.5, 0.5, 1.5])])
        assert tail_distribution(m, 2, 1.2) == 0.5
        assert tail_distribution(m, 2, 0.4) == 1.0
        assert tail_distribution(m, 2, 2.0) == 0.0


class TestSmoothness:
    def test_sequence_from_profile(self):
        phi = LogPower(1.0, 0.5)
        beta = SmoothnessSequence.from_profile(phi)
        assert beta(3) == pytest.approx(float(phi.phi(2.0**-3)))

    def test_positive_required(self):
        with pytest.raises(ValueError):
            SmoothnessSequence([1.0, -0.5, 1.0])

    def test_increment_bound_detected(self):
        m = DyadicMartingale([np.array([1.0]), np.array([0.0, 2.0])])
        ok = smoothness_check(m, [4.001])
        assert ok.passed and ok.worst_increment_ratio <= 0.5
        bad = smoothness_check(m, [1.0])
        assert not bad.passed
        assert any(kind == "increment" for kind, *_ in bad.violations)

    def test_kahane_increments_within_half_beta(self):
        phi = LogPower(1.0, 0.5)
        mu = kahane_smooth(phi, 10, seed=1)
        m = martingale_from_measure(mu, 10)
        for n in range(1, 11):
            b = float(phi.phi(2.0**-n))
            assert np.abs(m.increments(n)).max() <= b / 2 + 1e-12


class TestConcentration:
    @pytest.mark.parametrize("seed", [0, 3])
    def test_subgaussian_tail(self, seed):
        # the sub-Gaussian bound is meaningful for s a couple of multiples
        # of A_n; below that the left side can saturate at 1 while the
        # right side is already below 1 (see the shallow-generation test)
        mu = kahane_smooth(LogPower(1.0, 0.5), 12, seed=seed)
        m = martingale_from_measure(mu, 12)
        for n in (4, 8, 12):
            an = max_square(m, n)
            for s in np.geomspace(2 * an, 6 * an, 20):
                assert tail_distribution(m, n, s) <= math.exp(-s**2 / (2 * an**2))

    def test_shallow_generations_saturate_below_threshold(self):
        # at generation 1 every point deviates by exactly A_1, so the
        # distribution function equals 1 up to s = A_1 while the Gaussian
        # bound is e^{-1/2}; the bound only takes hold at larger s
        mu = kahane_smooth(LogPower(1.0, 0.5), 4, seed=0)
        m = martingale_from_measure(mu, 4)
        a1 = max_square(m, 1)
        assert tail_distribution(m, 1, 0.9 * a1) == 1.0
        assert 1.0 > math.exp(-(0.9 * a1) ** 2 / (2 * a1**2))

    def test_exp_moment_bound(self):
        mu = kahane_smooth(LogPower(1.0, 0.5), 12, seed=2)
        m = martingale_from_measure(mu, 12)
        rep = exp_moment(m, 12, alpha=2.0)
        # centered exponential moment against A_n e^{alpha^2 A_n^2/2}; the
        # statement carries an unspecified constant, so require the ratio
        # to be a small number rather than at most one
        centered = DyadicMartingale(
            [lv - 1.0 for lv in m.levels], validate=False)
        rep_c = exp_moment(centered, 12, alpha=2.0)
        assert math.isfinite(rep_c.ratio) and rep_c.ratio < 20.0
        assert rep.value >= 1.0 and math.isfinite(rep.log_value)

    def test_exp_moment_log_space_survives_overflow(self):
        big = DyadicMartingale([np.array([500.0]), np.array([100.0, 900.0])])
        rep = exp_moment(big, 1, alpha=2.0)
        assert rep.value == math.inf and math.isfinite(rep.log_value)
        assert rep.log_value == pytest.approx(2.0 * 900 - math.log(2), rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_from_leaves_always_satisfies_mean_value(seed, depth):
    rng = np.random.default_rng(seed)
    m = DyadicMartingale.from_leaves(rng.random(2**depth))
    # re-validate explicitly
    DyadicMartingale(m.levels, validate=True)
