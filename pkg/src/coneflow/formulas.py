"""Closed forms for the sublevel-region masses and the limiting depth laws.

The masses are the integrals of dpsi dzeta / (psi - zeta)^2 over the
crossing-region sublevel sets; both the excursion law and the approximating
law are ratios of these.  The branch normalization here is pinned to the
direct two-sided integral (both signs of the forward endpoint), which the
quadrature and Monte Carlo routines in ``integrals`` verify independently.
A commonly tabulated variant scales some branches by 1/2 and degenerates at
k = 3; the audit report quantifies the difference, and the ratios below are
unaffected by it.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .regions import ConeConstants, phi


class MassValue(NamedTuple):
    value: float
    branch: str


def sublevel_mass(cc: ConeConstants, z: float) -> MassValue:
    """Mass of the crossing-region sublevel set at depth z.

    (2 pi / k) sinh z up to the embedding radius r_k, then
    2 [sinh z atan(1/sinh z) + log(sin(pi/k) cosh z)].
    """
    if z < 0.0:
        raise ValueError("depth must be nonnegative")
    if z <= cc.r_k:
        return MassValue(2.0 * math.pi / cc.k * math.sinh(z), "below_rk")
    sh = math.sinh(z)
    val = 2.0 * (sh * math.atan(1.0 / sh) + math.log(math.sin(math.pi / cc.k) * math.cosh(z)))
    return MassValue(val, "above_rk")


def approx_sublevel_mass(cc: ConeConstants, z: float) -> MassValue:
    """Mass of the approximating-region sublevel set at depth z.

    Constant for z >= r_k (every approximating pair has depth below r_k).
    For k = 3 the sector clips at 1/a_3 and the middle branch reduces to
    2 [sinh z atan(phi(sinh z)) + log cosh z], saturating at 2 log(2/sqrt 3).
    """
    if z < 0.0:
        raise ValueError("depth must be nonnegative")
    k = cc.k
    if k >= 5 and z <= cc.delta_k:
        return MassValue(2.0 * math.pi / k * math.sinh(z), "below_delta")
    if z >= cc.r_k:
        if k == 3:
            return MassValue(2.0 * math.log(2.0 / math.sqrt(3.0)), "saturated")
        return MassValue(2.0 * math.log(2.0 * math.cos(math.pi / k)), "saturated")
    sh = math.sinh(z)
    if k == 3:
        val = 2.0 * (sh * math.atan(phi(cc, sh)) + math.log(math.cosh(z)))
    else:
        val = 2.0 * (
            sh * math.atan(phi(cc, sh))
            + math.log(2.0 * math.cosh(z) * math.sin(math.pi / k) * math.cos(math.pi / k))
        )
    return MassValue(val, "middle")


_EDGE = 1e-12  # tolerated domain overshoot from round-tripped parameters


def depth_cdf(cc: ConeConstants, r: float, z: float) -> float:
    """Limiting distribution of excursion depths under cutoff r, evaluated at z.

    The ratio of sublevel masses; equal to sinh z / sinh r whenever r <= r_k.
    """
    if not r > 0.0:
        raise ValueError("cutoff must be positive")
    if not 0.0 <= z <= r * (1.0 + _EDGE) + _EDGE:
        raise ValueError(f"depth must lie in [0, {r}], got {z}")
    z = min(z, r)
    return sublevel_mass(cc, z).value / sublevel_mass(cc, r).value


def approx_depth_cdf(cc: ConeConstants, z: float) -> float:
    """Limiting distribution of approximating-excursion depths, evaluated at z."""
    if not 0.0 <= z <= cc.r_k + _EDGE:
        raise ValueError(f"depth must lie in [0, r_k = {cc.r_k}], got {z}")
    return approx_sublevel_mass(cc, min(z, cc.r_k)).value / \
        approx_sublevel_mass(cc, cc.r_k).value


# ---------------------------------------------------------------------------
# Area parameterization: depth re-expressed as the normalized area of the
# largest avoided cone neighborhood, (2 pi / k)(cosh d - 1).


def area_depth(cc: ConeConstants, d: float) -> float:
    """Area-depth of an excursion of radial depth d; strictly increasing."""
    if d < 0.0:
        raise ValueError("depth must be nonnegative")
    return 2.0 * math.pi / cc.k * (math.cosh(d) - 1.0)


def depth_from_area(cc: ConeConstants, area: float) -> float:
    """Inverse of area_depth."""
    if area < 0.0:
        raise ValueError("area must be nonnegative")
    return math.acosh(cc.k * area / (2.0 * math.pi) + 1.0)


def area_depth_cdf(cc: ConeConstants, big_r: float, big_z: float) -> float:
    """Excursion law in area coordinates.

    Defined as depth_cdf composed with the area-to-radius change of
    variables.  On the small-cutoff branch big_r <= area_depth(r_k) this
    equals sqrt(((Z + 2pi/k)^2 - (2pi/k)^2) / ((R + 2pi/k)^2 - (2pi/k)^2)),
    and the closed form is returned there; outside it falls through to the
    composition.
    """
    if not big_r > 0.0:
        raise ValueError("area cutoff must be positive")
    if not 0.0 <= big_z <= big_r:
        raise ValueError("area depth must lie in [0, R]")
    if big_r <= area_depth(cc, cc.r_k):
        e = 2.0 * math.pi / cc.k
        num = (big_z + e) ** 2 - e * e
        den = (big_r + e) ** 2 - e * e
        return math.sqrt(num / den)
    return depth_cdf(cc, depth_from_area(cc, big_r), depth_from_area(cc, big_z))


def approx_area_depth_cdf(cc: ConeConstants, big_z: float) -> float:
    """Approximating law in area coordinates.

    Closed square-root form sqrt((Z + 2pi/k)^2 - (2pi/k)^2) / (2 log(2 cos(pi/k)))
    on big_z <= area_depth(delta_k) (nonempty only for k >= 5); otherwise the
    composition with depth_from_area.
    """
    if not 0.0 <= big_z <= area_depth(cc, cc.r_k):
        raise ValueError("area depth out of range")
    if cc.k >= 5 and big_z <= area_depth(cc, cc.delta_k):
        e = 2.0 * math.pi / cc.k
        num = math.sqrt((big_z + e) ** 2 - e * e)
        return num / (2.0 * math.log(2.0 * math.cos(math.pi / cc.k)))
    return approx_depth_cdf(cc, depth_from_area(cc, big_z))
