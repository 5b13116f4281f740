import json
import math

import numpy as np
import pytest

from cyclia.diagnostics import (CheckReport, annihilator_pairing,
                                bloch_difference_bound, brown_shields_table,
                                carleson_box_measure, derivative_sup_ratio,
                                fourier_decay_fit, fourier_lp_summability,
                                korenblum_necessity, multiplier_log_onebox,
                                pmean_ratio, poisson_martingale_gap)
from cyclia.dyadic import DyadicInterval
from cyclia.measures import (IntervalSet, SalemSpec, atomic,
                             choose_salem_parameters, kahane_smooth, lebesgue,
                             salem_measure)
from cyclia.models import Polynomial, SingularInnerPower
from cyclia.norms import QuadratureGrid
from cyclia.profiles import LogPower, PowerLaw

ATOM = atomic([(0.0, 1.0)])
LEB = lebesgue()
PHI = LogPower(1.0, 0.5)


@pytest.fixture(scope="module")
def kahane():
    return kahane_smooth(PHI, 12, seed=7)


@pytest.fixture(scope="module")
def salem():
    d, xi = choose_salem_parameters(0.8, 0.05)
    return salem_measure(SalemSpec(alpha=0.8, epsilon=0.05, d=d, xi=xi,
                                   generations=10, seed=3))


class TestReport:
    def test_json_round_trip_and_runtime_excluded(self):
        rep = CheckReport(name="x", params={"p": 3.0}, table=[{"a": 1.0}],
                          fits={"c": 2.0}, worst_ratio=0.1, threshold=1.0,
                          verdict="pass", runtime=12.3)
        data = json.loads(rep.to_json())
        assert data["verdict"] == "pass"
        assert "runtime" not in data

    def test_csv_layout(self):
        rep = CheckReport(name="x", params={}, table=[{"a": 1.0, "b": 2}],
                          verdict="pass")
        lines = rep.to_csv().strip().split("\n")
        assert lines[0] == "a,b"
        assert lines[1].startswith("1,")


class TestBrownShields:
    def test_constant_model_zero(self):
        rep = brown_shields_table(Polynomial([4.0]), 3.0, [0.5, 0.9])
        assert rep.passed
        assert all(row["value"] == 0.0 for row in rep.table)

    def test_atom_blows_up(self):
        f = SingularInnerPower(ATOM, 0.1)
        rep = brown_shields_table(f, 3.0, [0.5, 0.9, 0.99])
        assert not rep.passed
        vals = [row["value"] for row in rep.table]
        assert vals[-1] > 10 * vals[0]

    def test_p_validated(self):
        with pytest.raises(ValueError):
            brown_shields_table(Polynomial([1.0]), 2.0, [0.5])


class TestPMeans:
    def test_lebesgue_flat(self):
        rep = pmean_ratio(LEB, PHI, 3.0, [0.01, 0.5, 0.9, 0.99])
        assert rep.passed
        expect = math.log(2 * math.pi) + 3.0
        assert rep.table[0]["log_lhs"] == pytest.approx(expect, rel=0.02)

    def test_atom_fails(self):
        rep = pmean_ratio(ATOM, PHI, 3.0,
                          [1 - 2.0**-k for k in range(2, 12)])
        assert not rep.passed

    def test_kahane_residuals_tight(self, kahane):
        rep = pmean_ratio(kahane, PHI, 3.0,
                          [1 - 2.0**-k for k in range(2, 13)])
        assert rep.passed
        assert rep.fits["residual_spread_decades"] < 1.0


class TestPoissonMartingale:
    def test_lebesgue_constant_gap(self):
        rep = poisson_martingale_gap(LEB, 10)
        assert rep.passed
        assert rep.fits["C"] == pytest.approx(1.0, abs=1e-12)
        assert abs(rep.fits["sup_gap"]) < 1e-10

    def test_atom_ratio_bounded_on_tower(self):
        rep = poisson_martingale_gap(ATOM, 12)
        # P and M both blow up like 2^n on the atom column, so their
        # pooled slope settles at a fixed positive constant (its size
        # reflects the angular offset of the sample point from the atom)
        assert rep.fits["C"] > 0.05
        for row in rep.table[4:]:
            ratio = row["max_poisson"] / row["max_martingale"]
            assert 0.1 < ratio < 2.0

    def test_kahane_stable(self, kahane):
        rep = poisson_martingale_gap(kahane, 12)
        assert rep.passed
        assert 0.5 < rep.fits["C"] < 2.0


class TestCarlesonBox:
    def test_root_box_identity(self):
        p = 3.0
        val = carleson_box_measure(Polynomial([0, 1.0]), p, DyadicInterval(0, 0))
        assert val == pytest.approx(2 * math.pi / (p * (p + 1)), rel=1e-9)

    def test_constant_zero(self):
        assert carleson_box_measure(Polynomial([2.0]), 3.0,
                                    DyadicInterval(4, 7)) == 0.0

    def test_children_sum_below_parent(self):
        f = Polynomial([0, 0, 1.0])
        I = DyadicInterval(2, 1)
        full = carleson_box_measure(f, 3.0, I)
        kids = sum(carleson_box_measure(f, 3.0, c) for c in I.children())
        assert kids <= full + 1e-12
        # the difference is the top-half ring contribution, strictly positive
        assert full - kids > 0

    def test_matches_besov_power(self):
        from cyclia.norms import besov_seminorm
        f = Polynomial([0, 1.0, 0.5])
        p = 3.0
        box = carleson_box_measure(f, p, DyadicInterval(0, 0))
        semi, err = besov_seminorm(f, p)
        assert box == pytest.approx(semi**p, rel=1e-6)


class TestMultiplier:
    def test_lebesgue_zero(self):
        rep = multiplier_log_onebox(LEB, 3.0, 8)
        assert rep.passed
        assert rep.fits["sup_ratio"] < 1e-30

    def test_atom_fails(self):
        rep = multiplier_log_onebox(ATOM, 3.0, 12)
        assert not rep.passed

    def test_kahane_stabilizes(self, kahane):
        rep = multiplier_log_onebox(kahane, 3.0, 10)
        assert rep.passed


class TestDerivativeSup:
    def test_lebesgue_zero(self):
        rep = derivative_sup_ratio(LEB, PHI, [0.5, 0.9])
        assert rep.passed
        assert rep.fits["sup_ratio"] < 1e-12

    def test_atom_power_law_unbounded(self):
        rs = [1 - 2.0**-k for k in range(2, 15)]
        rep = derivative_sup_ratio(ATOM, PowerLaw(1.0, 0.5), rs)
        assert not rep.passed

    def test_kahane_bounded(self, kahane):
        rs = [1 - 2.0**-k for k in range(2, 15)]
        rep = derivative_sup_ratio(kahane, PHI, rs)
        assert rep.passed


class TestKorenblum:
    def test_atom_obstruction(self):
        E = IntervalSet.from_arcs([(0.0, 0.0)])
        rep = korenblum_necessity(ATOM, E)
        assert rep.verdict == "fail"
        assert rep.fits["mass"] == pytest.approx(1.0)
        assert rep.fits["entropy"] == 0.0

    def test_lebesgue_no_obstruction(self):
        E = IntervalSet.from_arcs([(0.1, 0.1), (0.5, 0.5)])
        rep = korenblum_necessity(LEB, E)
        assert rep.verdict == "pass"

    def test_salem_obstruction(self, salem):
        mu, E = salem
        rep = korenblum_necessity(mu, E)
        assert rep.verdict == "fail"
        assert rep.fits["entropy_verdict"] == "convergent"


class TestAnnihilator:
    def test_lebesgue_exact_zero(self):
        v = annihilator_pairing(LEB, 0, 100, 0.9)
        assert abs(v) < 1e-14

    def test_atom_decreasing_in_r(self):
        vals = [abs(annihilator_pairing(ATOM, 0, 800, r, M=4096))
                for r in (0.9, 0.99, 0.999)]
        assert vals[1] < vals[0] and vals[2] < vals[1]

    def test_converged_in_k(self):
        a = abs(annihilator_pairing(ATOM, 1, 400, 0.99, M=4096))
        b = abs(annihilator_pairing(ATOM, 1, 800, 0.99, M=4096))
        assert a == pytest.approx(b, abs=1e-5)


class TestBlochDiff:
    def test_constant_zero(self):
        rep = bloch_difference_bound(Polynomial([2.0]), Polynomial([0, 1.0]),
                                     2.0, [0.5, 0.9])
        assert rep.passed
        assert all(row["value"] == 0.0 for row in rep.table)

    def test_identity_pair_bounded(self):
        rep = bloch_difference_bound(Polynomial([0, 1.0]), Polynomial([0, 1.0]),
                                     2.0, [0.3, 0.6, 0.9, 0.99])
        assert rep.passed

    def test_inner_against_monomial(self):
        f = SingularInnerPower(ATOM, 1.0)
        g = Polynomial([0.0] * 5 + [1.0])
        rep = bloch_difference_bound(f, g, 2.0, [0.5, 0.9, 0.99])
        assert rep.passed


class TestFourier:
    def test_atom_slope_zero(self):
        rep = fourier_decay_fit(ATOM, 256)
        assert rep.fits["slope"] == 0.0
        assert not rep.passed

    def test_lebesgue_raises(self):
        with pytest.raises(ValueError):
            fourier_decay_fit(LEB, 256)

    def test_salem_decay(self, salem):
        mu, _ = salem
        rep = fourier_decay_fit(mu, 2048)
        assert rep.passed
        assert rep.fits["slope"] <= -0.25

    def test_lp_atom_fails(self):
        rep = fourier_lp_summability(ATOM, 4.0, 1024)
        assert not rep.passed
        sums = [row["partial_sum"] for row in rep.table]
        assert sums[-1] > 1.9 * sums[-2]        # linear growth

    def test_lp_lebesgue_mass_power(self):
        rep = fourier_lp_summability(lebesgue(2.0), 3.0, 256)
        assert rep.passed
        assert rep.fits["partial_sum"] == pytest.approx(8.0)

    def test_lp_salem_passes(self, salem):
        mu, _ = salem
        rep = fourier_lp_summability(mu, 4.0, 2048)
        assert rep.passed

    def test_preconditions(self):
        with pytest.raises(ValueError):
            fourier_decay_fit(ATOM, 32)
        with pytest.raises(ValueError):
            fourier_lp_summability(ATOM, 1.5, 256)
