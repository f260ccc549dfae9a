"""Hyperbolic geometry in the upper half-plane and unit-disc models.

Conventions used throughout the package:

* points of the half-plane are ``HPoint`` instances (y > 0 strictly);
* boundary points are plain floats, with ``math.inf`` as the point at
  infinity of the extended real line;
* a complete geodesic is an ordered pair of distinct boundary points,
  forward endpoint first;
* orientation-preserving isometries are ``MobiusMap`` instances, stored
  as real 2x2 matrices normalized to determinant one with a canonical
  sign, so that two representations of the same projective map compare
  equal after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INFINITY = math.inf

_ZERO_POLE_TOL = 0.0  # exact pole detection; callers see inf, never NaN


@dataclass(frozen=True)
class HPoint:
    """A point x + iy of the upper half-plane, y > 0 strictly."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0.0:
            raise ValueError(f"HPoint requires y > 0, got y={self.y}")

    @property
    def as_complex(self) -> complex:
        return complex(self.x, self.y)


I_POINT = HPoint(0.0, 1.0)


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic with ordered boundary endpoints (forward, backward)."""

    fwd: float
    bwd: float

    def __post_init__(self):
        if self.fwd == self.bwd:
            raise ValueError("geodesic endpoints must differ")


@dataclass(frozen=True)
class MobiusMap:
    """Real Mobius map z -> (az + b)/(cz + d) with ad - bc > 0.

    Entries are rescaled to determinant one and the sign is fixed so the
    first nonzero entry of (a, b, c, d) is positive; projective equality
    is then plain field equality.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0.0:
            raise ValueError(f"MobiusMap requires positive determinant, got {det}")
        s = 1.0 / math.sqrt(det)
        a, b, c, d = self.a * s, self.b * s, self.c * s, self.d * s
        for entry in (a, b, c, d):
            if entry != 0.0:
                if entry < 0.0:
                    a, b, c, d = -a, -b, -c, -d
                break
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    def apply(self, z: HPoint) -> HPoint:
        w = (self.a * z.as_complex + self.b) / (self.c * z.as_complex + self.d)
        return HPoint(w.real, w.imag)

    def apply_complex(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_boundary(self, x: float) -> float:
        """Extended-real action; poles map to inf and inf maps to a/c."""
        if math.isinf(x):
            return self.a / self.c if self.c != 0.0 else INFINITY
        den = self.c * x + self.d
        if den == _ZERO_POLE_TOL:
            return INFINITY
        return (self.a * x + self.b) / den

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self after other."""
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def apply_geodesic(self, g: Geodesic) -> Geodesic:
        return Geodesic(self.apply_boundary(g.fwd), self.apply_boundary(g.bwd))


def hyp_dist(p: HPoint, q: HPoint) -> float:
    """Hyperbolic distance between two half-plane points."""
    num = (p.x - q.x) ** 2 + (p.y - q.y) ** 2
    return math.acosh(1.0 + num / (2.0 * p.y * q.y))


def _sinh_dist_to_geodesic(x0: float, y0: float, fwd: float, bwd: float) -> float:
    # Power-of-a-point form |(x0-f)(x0-b) + y0^2| / (|f-b| y0): no center/radius
    # cancellation for extreme endpoints.  Vertical case via |x0 - v| / y0.
    if math.isinf(fwd) or math.isinf(bwd):
        v = bwd if math.isinf(fwd) else fwd
        return abs(x0 - v) / y0
    return abs((x0 - fwd) * (x0 - bwd) + y0 * y0) / (abs(fwd - bwd) * y0)


def dist_point_geodesic(p: HPoint, g: Geodesic) -> float:
    """Distance from a point to a complete geodesic."""
    return math.asinh(_sinh_dist_to_geodesic(p.x, p.y, g.fwd, g.bwd))


def pair_depth(x: float, y: float) -> float:
    """Distance from i to the geodesic with boundary endpoints (x, y)."""
    if x == y:
        raise ValueError("pair_depth requires distinct endpoints")
    return dist_point_geodesic(I_POINT, Geodesic(x, y))


def sinh_pair_depth(x: float, y: float) -> float:
    """sinh of pair_depth; cheaper and monotone-equivalent for threshold tests."""
    return _sinh_dist_to_geodesic(0.0, 1.0, x, y)


def rotation_about_i(k: int) -> MobiusMap:
    """The order-k elliptic rotation about i, z -> (cos(pi/k) z + sin(pi/k)) / (-sin(pi/k) z + cos(pi/k))."""
    if k < 3:
        raise ValueError(f"cone order must be >= 3, got {k}")
    c, s = math.cos(math.pi / k), math.sin(math.pi / k)
    return MobiusMap(c, s, -s, c)


# ---------------------------------------------------------------------------
# Cayley transfer between the unit disc and the half-plane.
# The map w -> (-iw + i)/(w + 1) sends 0 to i, the boundary point 1 to 0 and
# -1 to inf, upper/lower semicircle to the positive/negative real axis.


def cayley_to_halfplane(w: complex) -> HPoint:
    """Disc interior point to half-plane point."""
    if abs(w) >= 1.0:
        raise ValueError(f"interior Cayley transfer requires |w| < 1, got |w|={abs(w)}")
    z = (-1j * w + 1j) / (w + 1.0)
    return HPoint(z.real, z.imag)


def cayley_from_halfplane(p: HPoint) -> complex:
    """Inverse interior transfer: i maps to 0."""
    z = p.as_complex
    return (1j - z) / (1j + z)


def cayley_boundary_to_real(w: complex) -> float:
    """Unit-circle point to extended-real boundary point (-1 maps to inf)."""
    den = w + 1.0
    if den == 0.0:
        return INFINITY
    z = (-1j * w + 1j) / den
    return z.real


def cayley_real_to_boundary(x: float) -> complex:
    """Extended-real boundary point to unit-circle point."""
    if math.isinf(x):
        return complex(-1.0, 0.0)
    w = (1j - x) / (1j + x)
    return w


def disc_radius_euclidean(rho: float) -> float:
    """Euclidean radius of the disc-model circle of hyperbolic radius rho about 0."""
    if rho < 0.0:
        raise ValueError("radius must be nonnegative")
    return math.tanh(rho / 2.0)


def tangent_chord_length(rho: float) -> float:
    """Euclidean length of a boundary chord tangent to the radius-rho disc about 0."""
    if rho < 0.0:
        raise ValueError("radius must be nonnegative")
    return 2.0 / math.cosh(rho)


def tangent_point_disc(z: complex, rho: float) -> complex:
    """Second endpoint of the chord from z tangent to the radius-rho disc about 0.

    The returned point lies to the right of the oriented diameter through z;
    for rho = 0 the chord is the diameter itself.
    """
    if rho < 0.0:
        raise ValueError("radius must be nonnegative")
    sech2 = 1.0 / math.cosh(rho) ** 2
    c = 1.0 - 2.0 * sech2
    return z * complex(c, -math.sqrt(max(0.0, 1.0 - c * c)))


# ---------------------------------------------------------------------------
# Tangency in the half-plane: the boundary endpoint pairing with x so that the
# joining geodesic is tangent to the hyperbolic disc of radius rho about i.


def tangent_endpoint(rho: float, x: float) -> float:
    """Backward endpoint w with pair_depth(x, w) = rho.

    For x >= 0 the result is (x sinh(rho) - 1)/(x + sinh(rho)), the unique
    such point in [-1/x, x); for x <= 0 it is the mirror image -W(rho, -x)
    in (x, -1/x].  The degenerate corner x = 0, rho = 0 is rejected (the
    geodesics through 0 tangent to the point-disc {i} all pass through i).
    """
    if rho < 0.0:
        raise ValueError("radius must be nonnegative")
    if x < 0.0:
        return -tangent_endpoint(rho, -x)
    sh = math.sinh(rho)
    if x == 0.0:
        if sh == 0.0:
            raise ValueError("tangent_endpoint undefined at x = 0, rho = 0")
        return -1.0 / sh
    return (x * sh - 1.0) / (x + sh)


def tangent_endpoint_bisect(x: float, rho: float, tol: float = 1e-13) -> float:
    """Independent check of tangent_endpoint by bisection.

    Uses only the monotonicity of w -> pair_depth(x, w) on [-1/x, x): no
    tangency formula enters.  Requires x >= 0 and rho > 0.
    """
    if x < 0.0:
        raise ValueError("bisection oracle is defined for x >= 0")
    if not rho > 0.0:
        raise ValueError("bisection oracle requires rho > 0")
    target = math.sinh(rho)
    if x == 0.0:
        # depth(0, w) = asinh(1/|w|) is increasing in w < 0; bracket around
        # the solution instead of the unusable [-inf, 0) interval.
        lo = -2.0 / target - 1.0
        hi = -min(1.0 / (2.0 * target), 1e300)
    else:
        lo, hi = -1.0 / x, x
    # sinh(depth) is increasing in w on the bracket, 0 at lo, +inf at hi.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if sinh_pair_depth(x, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi)
