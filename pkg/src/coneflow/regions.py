"""Per-order constants and the endpoint-pair regions of the excursion theory.

An endpoint pair (psi, zeta) is the ordered pair of boundary endpoints of a
lifted geodesic, forward first.  The crossing region collects the pairs whose
geodesic crosses the marked ray from i to 0; the approximating region is the
deeper part where the backward endpoint lies beyond the mirror sector edge,
so the geodesic loops around the cone lift.

All membership predicates take the crossing constraint psi * zeta > -1 by
default: pairs violating it cross the imaginary axis above i and never meet
the marked ray.  The unrestricted product-set variants are available via
``unrestricted=True`` for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .halfplane import sinh_pair_depth, tangent_endpoint


@dataclass(frozen=True)
class ConeConstants:
    """Derived constants for a cone point of order k >= 3.

    a_k = tan(pi/k) bounds the forward-endpoint sector; r_k = asinh(cot(pi/k))
    is the largest radius whose disc neighborhood stays embedded k-to-1;
    delta_k = asinh(cot(2*pi/k)) separates the always-approximating depths
    (it is negative for k = 3 and zero for k = 4, where that regime is empty).
    """

    k: int
    a_k: float
    r_k: float
    delta_k: float


def cone_constants(k: int) -> ConeConstants:
    if k < 3:
        raise ValueError(f"cone order must be >= 3, got {k}")
    t = math.tan(math.pi / k)
    return ConeConstants(
        k=k,
        a_k=t,
        r_k=math.asinh(1.0 / t),
        delta_k=math.asinh(1.0 / math.tan(2.0 * math.pi / k)) if k != 4 else 0.0,
    )


def phi(cc: ConeConstants, x: float) -> float:
    """The fractional-linear involution (1 - x a_k)/(x + a_k).

    Fixes the tangency geometry of the approximating region: it swaps
    sinh(depth) with the forward coordinate where the tangent endpoint
    reaches -a_k.  Pole at x = -a_k is rejected.
    """
    den = x + cc.a_k
    if den == 0.0:
        raise ValueError("phi pole at x = -a_k")
    return (1.0 - x * cc.a_k) / den


def _crosses(psi: float, zeta: float) -> bool:
    # psi * zeta > -1 with infinities excluded (inf * finite-of-opposite-sign
    # is -inf, correctly rejected).
    if math.isinf(psi) or math.isinf(zeta):
        return False
    return psi * zeta > -1.0


def in_crossing_pairs(cc: ConeConstants, psi: float, zeta: float, unrestricted: bool = False) -> bool:
    """Membership in the excursion endpoint region.

    The product set is (-a_k, 0) x (0, inf) union (0, a_k) x (-inf, 0);
    by default only pairs whose geodesic actually crosses the marked ray
    (psi * zeta > -1) are accepted.
    """
    a = cc.a_k
    in_set = (-a < psi < 0.0 and zeta > 0.0) or (0.0 < psi < a and zeta < 0.0)
    if unrestricted:
        return in_set
    return in_set and _crosses(psi, zeta)


def in_approx_pairs(cc: ConeConstants, psi: float, zeta: float, unrestricted: bool = False) -> bool:
    """Membership in the approximating (looping) endpoint region.

    As in_crossing_pairs but the backward endpoint lies beyond the opposite
    sector edge: |zeta| > a_k with sign opposite psi.
    """
    a = cc.a_k
    in_set = (-a < psi < 0.0 and zeta > a) or (0.0 < psi < a and zeta < -a)
    if unrestricted:
        return in_set
    return in_set and _crosses(psi, zeta)


def in_sublevel(cc: ConeConstants, z: float, psi: float, zeta: float) -> bool:
    """Crossing pair with depth at most z (the region integrated for the depth law).

    The boundary psi * zeta = -1 (geodesic through i, depth zero) counts as
    inside.
    """
    if z < 0.0:
        raise ValueError("sublevel threshold must be nonnegative")
    if not in_crossing_pairs(cc, psi, zeta, unrestricted=True):
        return False
    if math.isinf(zeta) or psi * zeta < -1.0:
        return False
    return sinh_pair_depth(psi, zeta) <= math.sinh(z)


def in_approx_sublevel(cc: ConeConstants, z: float, psi: float, zeta: float) -> bool:
    """Approximating pair with depth at most z; boundary convention as in_sublevel."""
    if z < 0.0:
        raise ValueError("sublevel threshold must be nonnegative")
    if not in_approx_pairs(cc, psi, zeta, unrestricted=True):
        return False
    if math.isinf(zeta) or psi * zeta < -1.0:
        return False
    return sinh_pair_depth(psi, zeta) <= math.sinh(z)


def backward_interval(cc: ConeConstants, x: float, z: float, region: str = "crossing"):
    """Backward endpoints y with depth(x, y) <= z inside the given region.

    For forward x in (0, a_k) the sublevel slice is the interval
    [-1/x, min(tangent_endpoint(z, x), clip)] where clip is 0 for the
    crossing region and -a_k for the approximating one.  Returns
    (lo, hi), or None when the slice is empty.
    """
    if not 0.0 < x < cc.a_k:
        raise ValueError("forward endpoint must lie in (0, a_k)")
    if z < 0.0:
        raise ValueError("threshold must be nonnegative")
    if region == "crossing":
        clip = 0.0
    elif region == "approx":
        clip = -cc.a_k
    else:
        raise ValueError(f"unknown region {region!r}")
    lo = -1.0 / x
    hi = min(tangent_endpoint(z, x), clip)
    if hi < lo:
        return None
    return (lo, hi)


def x_split(cc: ConeConstants, z: float) -> float:
    """Forward coordinate where the tangent endpoint at depth z reaches -a_k.

    Defined for max(delta_k, 0) <= z <= r_k, decreasing from a_k (k >= 5)
    or 1/a_k (clipped sector) down to 0 at z = r_k; this is the split point
    of the approximating-region integrals.
    """
    lo = max(cc.delta_k, 0.0)
    if not lo <= z <= cc.r_k:
        raise ValueError(f"x_split requires {lo} <= z <= {cc.r_k}, got {z}")
    return phi(cc, math.sinh(z))
