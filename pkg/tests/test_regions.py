import math

import numpy as np
import pytest

from coneflow.halfplane import pair_depth, sinh_pair_depth, tangent_endpoint
from coneflow.regions import (
    backward_interval,
    cone_constants,
    in_approx_pairs,
    in_approx_sublevel,
    in_crossing_pairs,
    in_sublevel,
    phi,
    x_split,
)

SQRT3 = math.sqrt(3.0)


class TestConstants:
    @pytest.mark.parametrize("k", range(3, 25))
    def test_defining_identities(self, k):
        cc = cone_constants(k)
        assert math.sinh(cc.r_k) * cc.a_k == pytest.approx(1.0, abs=1e-12)
        assert cc.a_k == pytest.approx(math.tan(math.pi / k), abs=1e-15)
        assert cc.delta_k < cc.r_k

    def test_delta_signs(self):
        assert cone_constants(3).delta_k < 0.0
        assert cone_constants(4).delta_k == 0.0
        for k in range(5, 20):
            assert cone_constants(k).delta_k > 0.0

    def test_delta_value(self):
        cc = cone_constants(7)
        assert math.sinh(cc.delta_k) == pytest.approx(1.0 / math.tan(2 * math.pi / 7), abs=1e-12)

    def test_small_k_rejected(self):
        with pytest.raises(ValueError):
            cone_constants(2)


class TestPhi:
    def test_r3_split_point_is_zero(self):
        cc = cone_constants(3)
        assert phi(cc, 1.0 / SQRT3) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("k", range(5, 13))
    def test_delta_split_point_is_sector_edge(self, k):
        cc = cone_constants(k)
        assert phi(cc, 1.0 / math.tan(2 * math.pi / k)) == pytest.approx(cc.a_k, abs=1e-13)

    def test_k4_at_zero(self):
        cc = cone_constants(4)
        assert phi(cc, 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_involution(self):
        cc = cone_constants(6)
        rng = np.random.default_rng(0)
        for x in rng.uniform(-0.4, 5.0, 30):
            assert phi(cc, phi(cc, x)) == pytest.approx(x, abs=1e-10)

    def test_pole_rejected(self):
        cc = cone_constants(3)
        with pytest.raises(ValueError):
            phi(cc, -cc.a_k)


class TestRegionPredicates:
    def test_small_symmetric_pair(self):
        cc = cone_constants(3)
        assert in_crossing_pairs(cc, 0.1, -0.1)

    def test_crossing_constraint_excludes_product_set_member(self):
        # (0.1, -20) is in the raw product set but its geodesic meets the
        # imaginary axis at height sqrt(2) > 1, above the marked ray.
        cc = cone_constants(3)
        assert in_crossing_pairs(cc, 0.1, -20.0, unrestricted=True)
        assert not in_crossing_pairs(cc, 0.1, -20.0)
        crossing_height = math.sqrt(-0.1 * -20.0)
        assert crossing_height > 1.0

    def test_crossing_height_criterion_matches_predicate(self):
        cc = cone_constants(3)
        rng = np.random.default_rng(1)
        for _ in range(300):
            psi = rng.uniform(1e-3, cc.a_k)
            zeta = -rng.uniform(1e-3, 30.0)
            # the geodesic meets x = 0 at height sqrt(-psi*zeta); it crosses
            # the ray from i to 0 iff that height is below 1
            want = (-psi * zeta) < 1.0
            assert in_crossing_pairs(cc, psi, zeta) == want

    def test_approx_pair_example_k5(self):
        cc = cone_constants(5)
        psi = cc.a_k / 2
        zeta = -cc.a_k - 0.01
        assert in_approx_pairs(cc, psi, zeta) == (psi * (cc.a_k + 0.01) < 1.0)
        assert in_approx_pairs(cc, psi, zeta)

    def test_infinite_endpoint_excluded(self):
        cc = cone_constants(3)
        assert not in_crossing_pairs(cc, 0.5, -math.inf)
        assert in_crossing_pairs(cc, 0.5, -math.inf, unrestricted=True)

    def test_approx_subset_of_crossing(self):
        rng = np.random.default_rng(2)
        for k in (3, 5, 8):
            cc = cone_constants(k)
            for _ in range(200):
                psi = rng.uniform(-cc.a_k, cc.a_k)
                zeta = rng.uniform(-20, 20)
                if in_approx_pairs(cc, psi, zeta):
                    assert in_crossing_pairs(cc, psi, zeta)

    def test_k3_approx_forward_extent(self):
        # the crossing constraint squeezes the forward extent to (0, 1/sqrt 3)
        cc = cone_constants(3)
        rng = np.random.default_rng(3)
        accepted = []
        for _ in range(20000):
            psi = rng.uniform(0.0, cc.a_k)
            zeta = -rng.uniform(cc.a_k, 30.0)
            if in_approx_pairs(cc, psi, zeta):
                accepted.append(psi)
        accepted = np.array(accepted)
        assert accepted.size > 100
        assert accepted.max() < 1.0 / SQRT3
        assert accepted.max() > 1.0 / SQRT3 - 0.05  # extent is actually reached


class TestSublevelRegions:
    def test_through_i_pair_is_inside_for_all_z(self):
        cc = cone_constants(3)
        # product exactly -1: depth 0, inside every sublevel set
        assert in_sublevel(cc, 0.0, 0.5, -2.0 + 0.0)  # psi*zeta = -1
        assert in_sublevel(cc, 0.3, 0.5, -2.0)

    def test_membership_matches_interval(self):
        cc = cone_constants(3)
        rng = np.random.default_rng(4)
        z = cc.r_k
        for _ in range(300):
            x = rng.uniform(1e-3, cc.a_k - 1e-9)
            y = -rng.uniform(1e-3, 1.0 / x)
            iv = backward_interval(cc, x, z, "crossing")
            inside = iv is not None and iv[0] <= y <= iv[1]
            assert in_sublevel(cc, z, x, y) == inside or \
                abs(y - iv[1]) < 1e-12  # boundary fuzz

    def test_monotone_in_z(self):
        cc = cone_constants(5)
        rng = np.random.default_rng(5)
        zs = [0.1, 0.3, 0.6, 1.0, cc.r_k]
        for _ in range(200):
            psi = rng.uniform(1e-3, cc.a_k)
            zeta = -rng.uniform(1e-3, 1.0 / psi)
            flags = [in_sublevel(cc, z, psi, zeta) for z in zs]
            assert flags == sorted(flags)  # False..False,True..True

    @pytest.mark.parametrize("k", (3, 4, 5, 7))
    def test_approx_saturates_at_rk(self, k):
        # every crossing-restricted approximating pair has depth < r_k
        cc = cone_constants(k)
        rng = np.random.default_rng(6)
        count = 0
        for _ in range(5000):
            psi = rng.uniform(0.0, min(cc.a_k, 1.0 / cc.a_k))
            zeta = -rng.uniform(cc.a_k, min(1.0 / psi, 50.0)) if psi > 0 else None
            if zeta is None or not in_approx_pairs(cc, psi, zeta):
                continue
            count += 1
            assert pair_depth(psi, zeta) <= cc.r_k + 1e-9
            assert in_approx_sublevel(cc, cc.r_k, psi, zeta)
        assert count > 500


class TestBackwardInterval:
    def test_zero_threshold_degenerate(self):
        cc = cone_constants(3)
        lo, hi = backward_interval(cc, 0.7, 0.0, "crossing")
        assert lo == hi == pytest.approx(-1.0 / 0.7, abs=1e-15)

    def test_clips_at_zero_when_threshold_large(self):
        cc = cone_constants(3)
        lo, hi = backward_interval(cc, 0.4, 5.0, "crossing")
        assert hi == 0.0
        assert lo == pytest.approx(-2.5, abs=1e-15)

    def test_right_end_is_tangent_endpoint(self):
        cc = cone_constants(3)
        z = math.log(SQRT3)
        lo, hi = backward_interval(cc, 1.0, z, "crossing")
        assert hi == pytest.approx(tangent_endpoint(z, 1.0), abs=1e-15)
        assert hi == pytest.approx((1.0 / SQRT3 - 1.0) / (1.0 + 1.0 / SQRT3), abs=1e-14)

    def test_approx_region_empty_beyond_reciprocal(self):
        cc = cone_constants(3)
        assert backward_interval(cc, 1.0, cc.r_k, "approx") is None

    def test_interval_members_have_small_depth(self):
        cc = cone_constants(5)
        z = 0.8
        for x in np.linspace(0.05, cc.a_k - 1e-6, 20):
            iv = backward_interval(cc, x, z, "crossing")
            assert iv is not None
            ys = np.linspace(iv[0], iv[1], 7)
            for y in ys[ys < 0]:
                assert sinh_pair_depth(x, y) <= math.sinh(z) * (1 + 1e-12)


class TestXSplit:
    def test_boundary_values(self):
        cc3 = cone_constants(3)
        assert x_split(cc3, cc3.r_k) == pytest.approx(0.0, abs=1e-13)
        cc7 = cone_constants(7)
        assert x_split(cc7, cc7.delta_k) == pytest.approx(cc7.a_k, abs=1e-13)

    def test_plugs_back_through_tangent_endpoint(self):
        cc = cone_constants(7)
        z = 0.5 * (cc.delta_k + cc.r_k)
        x = x_split(cc, z)
        assert tangent_endpoint(z, x) + cc.a_k == pytest.approx(0.0, abs=1e-12)

    def test_decreasing(self):
        cc = cone_constants(9)
        zs = np.linspace(cc.delta_k + 1e-6, cc.r_k - 1e-6, 20)
        vals = [x_split(cc, z) for z in zs]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_out_of_range_rejected(self):
        cc = cone_constants(5)
        with pytest.raises(ValueError):
            x_split(cc, cc.r_k + 0.1)
        with pytest.raises(ValueError):
            x_split(cc, cc.delta_k - 0.1)
