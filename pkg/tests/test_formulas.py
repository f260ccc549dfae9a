import math

import numpy as np
import pytest

from coneflow.formulas import (
    approx_area_depth_cdf,
    approx_depth_cdf,
    approx_sublevel_mass,
    area_depth,
    area_depth_cdf,
    depth_cdf,
    depth_from_area,
    sublevel_mass,
)
from coneflow.regions import cone_constants, phi

SQRT3 = math.sqrt(3.0)


def bracket(cc, z):
    sh = math.sinh(z)
    return sh * math.atan(1.0 / sh) + math.log(math.sin(math.pi / cc.k) * math.cosh(z))


class TestSublevelMass:
    def test_zero(self):
        cc = cone_constants(3)
        assert sublevel_mass(cc, 0.0).value == 0.0
        assert approx_sublevel_mass(cc, 0.0).value == 0.0

    def test_negative_rejected(self):
        cc = cone_constants(3)
        with pytest.raises(ValueError):
            sublevel_mass(cc, -0.1)

    def test_k3_value_at_embedding_radius(self):
        cc = cone_constants(3)
        want = 2.0 * math.pi / (3.0 * SQRT3)
        assert sublevel_mass(cc, cc.r_k).value == pytest.approx(want, abs=1e-14)
        # the doubled one-sided form agrees there by continuity
        assert 2.0 * bracket(cc, cc.r_k + 1e-15) == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("k", range(3, 25))
    def test_branch_continuity(self, k):
        cc = cone_constants(k)
        eps = 1e-12
        lo = sublevel_mass(cc, cc.r_k - eps).value
        hi = sublevel_mass(cc, cc.r_k + eps).value
        assert abs(hi - lo) <= 1e-9
        lo = approx_sublevel_mass(cc, cc.r_k - eps).value
        hi = approx_sublevel_mass(cc, cc.r_k + eps).value
        assert abs(hi - lo) <= 1e-9
        if k >= 5:
            lo = approx_sublevel_mass(cc, cc.delta_k - eps).value
            hi = approx_sublevel_mass(cc, cc.delta_k + eps).value
            assert abs(hi - lo) <= 1e-9

    def test_branch_labels(self):
        cc = cone_constants(5)
        assert sublevel_mass(cc, 0.5).branch == "below_rk"
        assert sublevel_mass(cc, 2.0).branch == "above_rk"
        assert approx_sublevel_mass(cc, 0.1).branch == "below_delta"
        assert approx_sublevel_mass(cc, 0.7).branch == "middle"
        assert approx_sublevel_mass(cc, 2.0).branch == "saturated"

    @pytest.mark.parametrize("k", (3, 4, 5, 7, 12))
    def test_monotone_and_saturation(self, k):
        cc = cone_constants(k)
        zs = np.linspace(0.0, 3.0, 120)
        lam = [sublevel_mass(cc, z).value for z in zs]
        als = [approx_sublevel_mass(cc, z).value for z in zs]
        assert all(b >= a - 1e-14 for a, b in zip(lam, lam[1:]))
        assert all(b >= a - 1e-14 for a, b in zip(als, als[1:]))
        sat = approx_sublevel_mass(cc, cc.r_k).value
        for z in (cc.r_k, cc.r_k + 0.4, cc.r_k + 1.1, cc.r_k + 7.0):
            assert approx_sublevel_mass(cc, z).value == pytest.approx(sat, abs=1e-15)

    def test_saturated_values(self):
        assert approx_sublevel_mass(cone_constants(4), 1.0).value == pytest.approx(
            math.log(2.0), abs=1e-14)
        assert approx_sublevel_mass(cone_constants(3), 1.0).value == pytest.approx(
            2.0 * math.log(2.0 / SQRT3), abs=1e-14)


class TestDepthCdf:
    def test_normalization(self):
        cc = cone_constants(3)
        for r in (0.2, cc.r_k, 1.5):
            assert depth_cdf(cc, r, r) == 1.0
            assert depth_cdf(cc, r, 0.0) == 0.0
        assert approx_depth_cdf(cc, cc.r_k) == 1.0
        assert approx_depth_cdf(cc, 0.0) == 0.0

    def test_small_cutoff_value(self):
        cc = cone_constants(3)
        assert depth_cdf(cc, 0.5, 0.25) == pytest.approx(
            math.sinh(0.25) / math.sinh(0.5), abs=1e-15)
        assert depth_cdf(cc, 0.5, 0.25) == pytest.approx(0.4847717, abs=5e-7)

    def test_domain_checks(self):
        cc = cone_constants(3)
        with pytest.raises(ValueError):
            depth_cdf(cc, 0.5, 0.6)
        with pytest.raises(ValueError):
            depth_cdf(cc, 0.0, 0.0)
        with pytest.raises(ValueError):
            approx_depth_cdf(cc, cc.r_k + 0.1)

    @pytest.mark.parametrize("k", (3, 4, 5, 7, 12))
    @pytest.mark.parametrize("r_mult", (0.5, 1.0, 1.8, 3.2))
    def test_is_cdf(self, k, r_mult):
        cc = cone_constants(k)
        r = r_mult * cc.r_k
        zs = np.linspace(0.0, r, 80)
        vals = [depth_cdf(cc, r, z) for z in zs]
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("k", (3, 4, 5, 7, 12))
    def test_approx_is_cdf(self, k):
        cc = cone_constants(k)
        zs = np.linspace(0.0, cc.r_k, 80)
        vals = [approx_depth_cdf(cc, z) for z in zs]
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))


class TestSmallCutoffLaw:
    """The ratio reproduces the two-case closed expression exactly."""

    @pytest.mark.parametrize("k", (3, 4, 5, 7, 12))
    def test_small_cutoff(self, k):
        cc = cone_constants(k)
        for r in (0.3 * cc.r_k, 0.9 * cc.r_k, cc.r_k):
            for z in np.linspace(0.0, r, 9)[1:]:
                assert depth_cdf(cc, r, z) == pytest.approx(
                    math.sinh(z) / math.sinh(r), abs=1e-12)

    @pytest.mark.parametrize("k", (3, 4, 5, 7, 12))
    def test_large_cutoff_below_branch(self, k):
        cc = cone_constants(k)
        for r in (1.3 * cc.r_k, 2.5 * cc.r_k):
            for z in np.linspace(1e-3, cc.r_k, 7):
                want = (math.pi / k) * math.sinh(z) / bracket(cc, r)
                assert depth_cdf(cc, r, z) == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("k", (3, 4, 5, 7, 12))
    def test_large_cutoff_above_branch(self, k):
        cc = cone_constants(k)
        for r in (1.3 * cc.r_k, 2.5 * cc.r_k):
            for z in np.linspace(cc.r_k * 1.0001, r, 7):
                want = bracket(cc, z) / bracket(cc, r)
                assert depth_cdf(cc, r, z) == pytest.approx(want, abs=1e-12)

    def test_worked_example(self):
        cc = cone_constants(3)
        want = (math.pi / 3) * math.sinh(0.3) / (
            math.sinh(1.0) * math.atan(1.0 / math.sinh(1.0))
            + math.log(math.sin(math.pi / 3) * math.cosh(1.0)))
        assert depth_cdf(cc, 1.0, 0.3) == pytest.approx(want, abs=1e-14)


class TestApproxLaw:
    @pytest.mark.parametrize("k", range(4, 13))
    def test_reproduces_two_case_expression(self, k):
        cc = cone_constants(k)
        denom = math.log(2.0 * math.cos(math.pi / k))
        for z in np.linspace(1e-3, cc.r_k, 11):
            if k >= 5 and z <= cc.delta_k:
                want = (math.pi / k) * math.sinh(z) / denom
            else:
                sh = math.sinh(z)
                want = (sh * math.atan(phi(cc, sh)) + math.log(
                    2.0 * math.cosh(z) * math.sin(math.pi / k) * math.cos(math.pi / k))) / denom
            assert approx_depth_cdf(cc, z) == pytest.approx(want, abs=1e-12)

    def test_k5_below_delta_value(self):
        cc = cone_constants(5)
        z = cc.delta_k
        want = (math.pi / 5) * math.sinh(z) / math.log(2.0 * math.cos(math.pi / 5))
        assert approx_depth_cdf(cc, z) == pytest.approx(want, abs=1e-12)

    def test_k3_corrected_form(self):
        cc = cone_constants(3)
        z = 0.3
        sh = math.sinh(z)
        want = (sh * math.atan(phi(cc, sh)) + math.log(math.cosh(z))) / math.log(2.0 / SQRT3)
        assert approx_depth_cdf(cc, z) == pytest.approx(want, abs=1e-14)


class TestAreaForms:
    def test_area_depth_values(self):
        cc = cone_constants(3)
        assert area_depth(cc, 0.0) == 0.0
        want = (2.0 * math.pi / 3.0) * (2.0 / SQRT3 - 1.0)
        assert area_depth(cc, cc.r_k) == pytest.approx(want, abs=1e-14)
        assert want == pytest.approx(0.324004, abs=5e-7)

    def test_inverse_roundtrip(self):
        cc = cone_constants(5)
        for d in (0.0, 0.3, 1.7, 4.0):
            assert depth_from_area(cc, area_depth(cc, d)) == pytest.approx(d, abs=1e-12)

    def test_unit_at_top(self):
        cc = cone_constants(4)
        assert area_depth_cdf(cc, 0.7, 0.7) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("k", (3, 5, 9))
    def test_closed_form_matches_composition(self, k):
        cc = cone_constants(k)
        r_cap = area_depth(cc, cc.r_k)
        for big_r in (0.3 * r_cap, 0.9 * r_cap, 2.5 * r_cap):
            for big_z in np.linspace(1e-6, big_r, 9):
                comp = depth_cdf(cc, depth_from_area(cc, big_r), depth_from_area(cc, big_z))
                assert area_depth_cdf(cc, big_r, big_z) == pytest.approx(comp, abs=1e-12)

    @pytest.mark.parametrize("k", (5, 9))
    def test_approx_closed_form_matches_composition(self, k):
        cc = cone_constants(k)
        z_cap = area_depth(cc, cc.r_k)
        for big_z in np.linspace(1e-6, z_cap, 11):
            comp = approx_depth_cdf(cc, depth_from_area(cc, big_z))
            assert approx_area_depth_cdf(cc, big_z) == pytest.approx(comp, abs=1e-12)

    def test_large_order_limits(self):
        cc = cone_constants(10 ** 6)
        assert area_depth_cdf(cc, 0.8, 0.4) == pytest.approx(0.5, abs=1e-4)
        assert approx_area_depth_cdf(cc, 0.5) == pytest.approx(
            0.5 / (2.0 * math.log(2.0)), abs=1e-3)
        assert 0.5 / (2.0 * math.log(2.0)) == pytest.approx(0.360674, abs=5e-7)
