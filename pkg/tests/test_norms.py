import math

import numpy as np
import pytest

from cyclia.measures import atomic
from cyclia.models import Polynomial, SingularInnerPower, maclaurin
from cyclia.norms import (QuadratureGrid, besov_norm, besov_seminorm,
                          bloch_seminorm, hp_mean, lp_a_norm, weighted_l2alpha)

Z = Polynomial([0.0, 1.0])
ATOM_S = SingularInnerPower(atomic([(0.0, 1.0)]), 1.0)


class TestSequenceNorms:
    def test_lp_a_closed_form(self):
        c = np.array([3.0, 4.0])
        assert lp_a_norm(c, 2.0) == pytest.approx(5.0)
        assert lp_a_norm(c, 1.0) == pytest.approx(7.0)

    def test_accepts_coefficient_vector(self):
        c = maclaurin(Polynomial([1.0, -2.0]), 3)
        assert lp_a_norm(c, 1.0) == pytest.approx(3.0, abs=1e-12)

    def test_weighted_l2(self):
        c = np.array([1.0, 1.0])
        assert weighted_l2alpha(c, 1.0) == pytest.approx(math.sqrt(3.0))
        assert weighted_l2alpha(c, 0.0) == pytest.approx(math.sqrt(2.0))

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            lp_a_norm([1.0], 0.0)


class TestBesov:
    def test_identity_p2(self):
        val, err = besov_seminorm(Z, 2.0)
        assert val == pytest.approx(math.sqrt(math.pi / 3), abs=1e-6)
        assert err < 1e-3

    def test_identity_p3(self):
        val, err = besov_seminorm(Z, 3.0)
        assert val == pytest.approx((math.pi / 6) ** (1 / 3), abs=1e-6)

    def test_constant_is_zero(self):
        val, err = besov_seminorm(Polynomial([7.0]), 2.0)
        assert val == 0.0

    def test_monomial_closed_form(self):
        # f = z^k: integral = 2 pi k^p int (1-r)^{p-1} r^{p(k-1)+1} dr
        k, p = 3, 2.0
        from scipy.integrate import quad
        ref, _ = quad(lambda r: (1 - r) ** (p - 1) * (k * r ** (k - 1)) ** p * r,
                      0, 1, epsrel=1e-12)
        val, _ = besov_seminorm(Polynomial([0, 0, 0, 1.0]), p)
        assert val == pytest.approx((2 * math.pi * ref) ** (1 / p), abs=1e-6)

    def test_error_estimate_bounds_doubling(self):
        grid = QuadratureGrid.build(panels=6)
        for f in [Z, Polynomial([0, 0, 1.0]), ATOM_S]:
            v1, e1 = besov_seminorm(f, 2.0, grid)
            v2, e2 = besov_seminorm(f, 2.0, grid.refine())
            assert abs(v1 - v2) <= e1 + e2

    def test_norm_adds_origin_value(self):
        n, _ = besov_norm(Polynomial([5.0, 1.0]), 2.0)
        s, _ = besov_seminorm(Polynomial([5.0, 1.0]), 2.0)
        assert n == pytest.approx(5.0 + s)

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            besov_seminorm(Z, 0.5)


class TestBloch:
    def test_identity(self):
        assert bloch_seminorm(Z) == pytest.approx(1.0)

    def test_square(self):
        # sup (1-r) 2r = 1/2 at r = 1/2
        assert bloch_seminorm(Polynomial([0, 0, 1.0])) == pytest.approx(
            0.5, abs=1e-3)

    def test_singular_inner_is_bloch(self):
        assert 0.0 < bloch_seminorm(ATOM_S) < 10.0


class TestHpMean:
    def test_constant(self):
        assert hp_mean(Polynomial([3.0]), 2.0, 0.5) == pytest.approx(3.0)

    def test_identity_p2(self):
        assert hp_mean(Z, 2.0, 0.5) == pytest.approx(0.5)

    def test_parseval(self):
        r = 0.7
        c = maclaurin(ATOM_S, 60)
        target = math.sqrt(sum(abs(ck) ** 2 * r ** (2 * k)
                               for k, ck in enumerate(c.coeffs)))
        assert hp_mean(ATOM_S, 2.0, r) == pytest.approx(target, abs=1e-10)

    def test_monotone_in_r_for_reciprocal(self):
        # 1/S has increasing means in r (subharmonicity of |f|^p)
        from cyclia.models import Quotient
        f = Quotient(Polynomial([1.0]), ATOM_S)
        means = [hp_mean(f, 2.0, r) for r in (0.1, 0.4, 0.7, 0.9)]
        assert all(b >= a for a, b in zip(means, means[1:]))

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            hp_mean(Z, 2.0, 1.5)
        with pytest.raises(ValueError):
            hp_mean(Z, -1.0, 0.5)


def test_grid_shapes():
    g = QuadratureGrid.build()
    assert len(g.r) == g.panels * g.nodes_per_panel
    assert np.all(np.diff(g.r) > 0)
    assert np.all((g.m & (g.m - 1)) == 0)     # powers of two
    fine = g.refine()
    assert fine.panels == 2 * g.panels
