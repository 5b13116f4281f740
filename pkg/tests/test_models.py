import math

import numpy as np
import pytest

from cyclia.measures import (SalemSpec, atomic, choose_salem_parameters,
                             kahane_smooth, lebesgue, salem_measure)
from cyclia.models import (AliasBoundError, Dilate, EvaluationError,
                           LogOfSingularInner, Outer, Polynomial, Product,
                           Quotient, SingularInnerPower, herglotz,
                           herglotz_derivative, herglotz_ring,
                           log_coefficients, maclaurin, poisson, poisson_ring)


ATOM = atomic([(0.0, 1.0)])
LEB = lebesgue()


class TestHerglotz:
    def test_atom_closed_form(self):
        # H(z) = (1 + z)/(1 - z) for the unit atom at x = 0
        for z in [0.0, 0.5, -0.7, 0.3 + 0.4j]:
            target = (1 + z) / (1 - z)
            assert herglotz(ATOM, z) == pytest.approx(target, abs=1e-12)

    def test_lebesgue_constant(self):
        for z in [0.0, 0.9, -0.9, 0.6j, -0.3 - 0.5j]:
            assert herglotz(LEB, z) == pytest.approx(1.0, abs=1e-12)

    def test_scaled_lebesgue(self):
        mu = lebesgue(2.5)
        assert herglotz(mu, 0.4 + 0.2j) == pytest.approx(2.5, abs=1e-12)

    def test_poisson_atom_on_negative_axis(self):
        for r in [0.1, 0.5, 0.9, 0.99]:
            assert poisson(ATOM, -r) == pytest.approx((1 - r) / (1 + r),
                                                      abs=1e-12)

    def test_derivative_atom(self):
        # H'(z) = 2/(1 - z)^2
        for z in [0.0, 0.5j, -0.6]:
            assert herglotz_derivative(ATOM, z) == pytest.approx(
                2.0 / (1 - z) ** 2, abs=1e-12)

    def test_boundary_rejected(self):
        with pytest.raises(ValueError):
            herglotz(ATOM, 1.0 + 0j)

    def test_additivity_in_measure(self):
        mu2 = atomic([(0.25, 0.5), (0.75, 0.5)])
        z = 0.3 - 0.2j
        parts = (0.5 * herglotz(atomic([(0.25, 1.0)]), z)
                 + 0.5 * herglotz(atomic([(0.75, 1.0)]), z))
        assert herglotz(mu2, z) == pytest.approx(parts, abs=1e-12)


class TestRings:
    @pytest.mark.parametrize("r", [0.5, 0.99, 0.999])
    def test_ring_matches_scalar_kahane(self, r):
        from cyclia.profiles import LogPower
        mu = kahane_smooth(LogPower(1.0, 0.5), 8, seed=2)
        m = 64
        ring = herglotz_ring(mu, r, m)
        pts = r * np.exp(2j * np.pi * np.arange(m) / m)
        scal = np.array([herglotz(mu, z) for z in pts])
        assert np.abs(ring - scal).max() < 1e-10

    def test_ring_matches_scalar_salem(self):
        d, xi = choose_salem_parameters(0.8, 0.05)
        mu, _ = salem_measure(SalemSpec(alpha=0.8, epsilon=0.05, d=d, xi=xi,
                                        generations=6, seed=1))
        r, m = 0.95, 32
        ring = herglotz_ring(mu, r, m)
        pts = r * np.exp(2j * np.pi * np.arange(m) / m)
        scal = np.array([herglotz(mu, z) for z in pts])
        assert np.abs(ring - scal).max() < 1e-10

    def test_offset_ring(self):
        r, m, off = 0.8, 16, 0.5
        ring = herglotz_ring(ATOM, r, m, offset=off)
        pts = r * np.exp(2j * np.pi * (np.arange(m) + off) / m)
        target = (1 + pts) / (1 - pts)
        assert np.abs(ring - target).max() < 1e-10

    def test_derivative_ring(self):
        r, m = 0.7, 32
        dring = herglotz_ring(ATOM, r, m, deriv=True)
        pts = r * np.exp(2j * np.pi * np.arange(m) / m)
        assert np.abs(dring - 2.0 / (1 - pts) ** 2).max() < 1e-10

    def test_poisson_ring_mean_is_mass(self):
        # the mean of P over a circle is mu(T)
        from cyclia.profiles import LogPower
        mu = kahane_smooth(LogPower(1.0, 0.5), 10, seed=5)
        vals = poisson_ring(mu, 0.99, 4096)
        assert vals.mean() == pytest.approx(mu.total_mass, abs=1e-10)


class TestModels:
    def test_singular_inner_at_zero(self):
        S = SingularInnerPower(ATOM, 1.0)
        assert S.val(0.0) == pytest.approx(math.exp(-1), abs=1e-12)

    def test_power_is_power(self):
        S1 = SingularInnerPower(ATOM, 1.0)
        S2 = SingularInnerPower(ATOM, 0.3)
        z = 0.4 + 0.1j
        assert S2.val(z) == pytest.approx(S1.val(z) ** 0.3, abs=1e-12)

    def test_modulus_below_one(self):
        S = SingularInnerPower(ATOM, 1.0)
        vals = S.ring(0.9, 128)
        assert np.abs(vals).max() < 1.0

    def test_dval_matches_finite_difference(self):
        S = SingularInnerPower(ATOM, 0.7)
        z, h = 0.3 + 0.2j, 1e-6
        fd = (S.val(z + h) - S.val(z - h)) / (2 * h)
        assert S.dval(z) == pytest.approx(fd, rel=1e-8)

    def test_log_model(self):
        L = LogOfSingularInner(ATOM)
        z = 0.25 - 0.1j
        assert L.val(z) == pytest.approx(-(1 + z) / (1 - z), abs=1e-12)

    def test_outer_from_log_modulus(self):
        # outer with boundary log-modulus identically 1 is e (constant)
        w = Outer(lebesgue(1.0))
        assert w.val(0.2 + 0.3j) == pytest.approx(math.e, abs=1e-10)

    def test_polynomial_and_dilate(self):
        f = Polynomial([1.0, 0.0, 2.0])
        assert f.val(0.5j) == pytest.approx(1 + 2 * (0.5j) ** 2)
        g = Dilate(f, 0.5)
        assert g.val(0.8) == pytest.approx(f.val(0.4))
        assert g.dval(0.8) == pytest.approx(0.5 * f.dval(0.4))

    def test_product_and_quotient(self):
        f = Polynomial([0.0, 1.0])
        g = Polynomial([1.0, 1.0])
        z = 0.3 + 0.3j
        assert Product([f, g]).val(z) == pytest.approx(z * (1 + z))
        q = Quotient(g, f)
        assert q.val(z) == pytest.approx((1 + z) / z)
        with pytest.raises(EvaluationError):
            q.val(0.0)

    def test_ring_fallback_consistent(self):
        f = Polynomial([1.0, -0.5, 0.25])
        r, m = 0.6, 16
        pts = r * np.exp(2j * np.pi * np.arange(m) / m)
        assert np.allclose(f.ring(r, m), [f.val(z) for z in pts])
        assert np.allclose(f.dring(r, m), [f.dval(z) for z in pts])


class TestMaclaurin:
    def composition_oracle(self, k_max):
        # f = exp(g), g = -(1+z)/(1-z): (k+1) f_{k+1} = sum (j+1) g_{j+1} f_{k-j}
        g = np.full(k_max + 2, -2.0)
        g[0] = -1.0
        f = np.zeros(k_max + 1)
        f[0] = math.exp(-1.0)
        for k in range(k_max):
            acc = sum((j + 1) * g[j + 1] * f[k - j] for j in range(k + 1))
            f[k + 1] = acc / (k + 1)
        return f

    def test_against_composition_oracle(self):
        S = SingularInnerPower(ATOM, 1.0)
        c = maclaurin(S, 50)
        oracle = self.composition_oracle(50)
        assert np.abs(c.coeffs - oracle).max() < 1e-12

    def test_spot_values(self):
        c = maclaurin(SingularInnerPower(ATOM, 1.0), 3)
        e = math.exp(-1.0)
        assert c[0] == pytest.approx(e, abs=1e-12)
        assert c[1] == pytest.approx(-2 * e, abs=1e-12)
        assert abs(c[2]) < 1e-12
        assert c[3] == pytest.approx(2 * e / 3, abs=1e-12)

    def test_polynomial_coefficients_exact(self):
        f = Polynomial([1.0, 2.0, 0.0, -3.0])
        c = maclaurin(f, 6)
        assert np.allclose(c.coeffs, [1, 2, 0, -3, 0, 0, 0], atol=1e-13)

    def test_alias_tolerance_raises(self):
        with pytest.raises(AliasBoundError):
            maclaurin(Polynomial([1.0] * 5), 3, r=0.99, m=8, tolerance=1e-30)

    def test_log_coefficients(self):
        c = log_coefficients(ATOM, 4)
        assert c[0] == pytest.approx(-1.0)
        # hat mu(n) = 1 for the unit atom at 0, so the tail entries are -2
        assert np.allclose(c.coeffs[1:], -2.0)
        # consistency: exp of the log-series reproduces S coefficients
        L = np.asarray(c.coeffs)
        f = np.zeros(5)
        f[0] = math.exp(L[0].real)
        for k in range(4):
            f[k + 1] = sum((j + 1) * L[j + 1].real * f[k - j]
                           for j in range(k + 1)) / (k + 1)
        target = maclaurin(SingularInnerPower(ATOM, 1.0), 4).coeffs
        assert np.abs(f - target).max() < 1e-12
