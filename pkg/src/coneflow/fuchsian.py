"""Concrete Fuchsian groups, cone-point normalization, and tiling walks.

The mandatory realization is the modular group (cone order 3, non-compact,
exact integer matrices); Hecke groups supply higher cone orders with float
matrices.  Both use the fundamental domain |Re z| <= w, |z| >= 1 with
w = lam/2 where lam is the translation length (1 for the modular group,
2 cos(pi/q) for the Hecke group of order q).

The normalization conjugates the group so the cone lift sits at i with
stabilizer generated by the standard order-k rotation, and the marked ray
out of the cone point (vertical, out the cusp) maps to the imaginary-axis
segment from i to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .halfplane import HPoint, Geodesic, MobiusMap, rotation_about_i
from ._kernels import kernels


def _canon_sign(a, b, c, d):
    for e in (a, b, c, d):
        if e != 0:
            if e < 0:
                return (-a, -b, -c, -d)
            break
    return (a, b, c, d)


@dataclass(frozen=True)
class IntMatrix:
    """Exact integer 2x2 matrix of determinant one, sign-canonicalized."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("IntMatrix must have determinant one")
        a, b, c, d = _canon_sign(self.a, self.b, self.c, self.d)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls) -> "IntMatrix":
        return cls(1, 0, 0, 1)

    def compose(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "IntMatrix":
        return IntMatrix(self.d, -self.b, -self.c, self.a)

    def apply_complex(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_boundary(self, x: float) -> float:
        if math.isinf(x):
            return self.a / self.c if self.c != 0 else math.inf
        den = self.c * x + self.d
        if den == 0.0:
            return math.inf
        return (self.a * x + self.b) / den

    def to_mobius(self) -> MobiusMap:
        return MobiusMap(float(self.a), float(self.b), float(self.c), float(self.d))

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class FuchsianModel:
    """A concrete group realization with one cone point and a cusp.

    generators are the translation z -> z + lam and the inversion z -> -1/z;
    elliptic_gen generates the order-k stabilizer of elliptic_fixed_point.
    corner_right/corner_left map the fixed point to the right/left corner of
    the fundamental domain (the two cone-orbit vertices of every tile).
    exact is True when group elements are IntMatrix instances.
    """

    name: str
    k: int
    lam: float
    generators: tuple
    elliptic_gen: object
    elliptic_fixed_point: complex
    cusp_width: float
    fd_halfwidth: float
    exact: bool
    corner_right: object
    corner_left: object

    def identity(self):
        return IntMatrix.identity() if self.exact else MobiusMap.identity()


@dataclass(frozen=True)
class Normalization:
    """Conjugation taking the model to the standard cone-at-i frame.

    M sends the elliptic fixed point to i and infinity to 0, mapping the
    vertical ray out of the fixed point onto the imaginary segment from i
    to 0; orientation records whether the conjugated stabilizer generator
    is the standard rotation (+1) or its inverse (-1).
    """

    M: MobiusMap
    M_inv: MobiusMap
    orientation: int


def modular_group() -> FuchsianModel:
    """The modular group: cone point of order 3 at (1 + i sqrt 3)/2."""
    t = IntMatrix(1, 1, 0, 1)
    s = IntMatrix(0, -1, 1, 0)
    e = IntMatrix(1, -1, 1, 0)
    return FuchsianModel(
        name="modular",
        k=3,
        lam=1.0,
        generators=(t, s),
        elliptic_gen=e,
        elliptic_fixed_point=complex(0.5, math.sqrt(3.0) / 2.0),
        cusp_width=1.0,
        fd_halfwidth=0.5,
        exact=True,
        corner_right=IntMatrix.identity(),
        corner_left=t.inverse(),
    )


def hecke_group(q: int) -> FuchsianModel:
    """Hecke group of order q >= 4: cone point of order q at (-lam + i sqrt(4 - lam^2))/2."""
    if q < 4:
        raise ValueError("hecke_group requires q >= 4 (use modular_group for order 3)")
    lam = 2.0 * math.cos(math.pi / q)
    t = MobiusMap(1.0, lam, 0.0, 1.0)
    s = MobiusMap(0.0, -1.0, 1.0, 0.0)
    e = s.compose(t)  # z -> -1/(z + lam), elliptic of order q
    fp = complex(-lam / 2.0, math.sqrt(4.0 - lam * lam) / 2.0)
    return FuchsianModel(
        name=f"hecke:{q}",
        k=q,
        lam=lam,
        generators=(t, s),
        elliptic_gen=e,
        elliptic_fixed_point=fp,
        cusp_width=lam,
        fd_halfwidth=lam / 2.0,
        exact=False,
        corner_right=t,
        corner_left=MobiusMap.identity(),
    )


def _mats_close(m1: MobiusMap, m2: MobiusMap, tol: float) -> bool:
    return (abs(m1.a - m2.a) <= tol and abs(m1.b - m2.b) <= tol
            and abs(m1.c - m2.c) <= tol and abs(m1.d - m2.d) <= tol)


def normalize(model: FuchsianModel) -> Normalization:
    """Conjugator onto the cone-at-i frame, with the orientation it induces.

    With fixed point u + iv the map is z -> -v/(z - u): it sends the fixed
    point to i, infinity to 0, and the vertical ray above the fixed point
    onto the imaginary segment (i, 0].  Verifies the conjugated stabilizer
    generator; a mismatch means a misconfigured model and raises.
    """
    u, v = model.elliptic_fixed_point.real, model.elliptic_fixed_point.imag
    m = MobiusMap(0.0, -v, 1.0, -u)
    m_inv = m.inverse()
    egen = model.elliptic_gen if isinstance(model.elliptic_gen, MobiusMap) \
        else model.elliptic_gen.to_mobius()
    conj = m.compose(egen).compose(m_inv)
    rot = rotation_about_i(model.k)
    if _mats_close(conj, rot, 1e-12):
        orientation = 1
    elif _mats_close(conj, rot.inverse(), 1e-12):
        orientation = -1
    else:
        raise ValueError(f"conjugated elliptic generator is not the order-{model.k} rotation")
    return Normalization(M=m, M_inv=m_inv, orientation=orientation)


# ---------------------------------------------------------------------------
# Fundamental-domain reduction and tiling walks


def _translation(model: FuchsianModel, n: int):
    """The n-th power of the translation generator, built directly."""
    if model.exact:
        return IntMatrix(1, n, 0, 1)
    return MobiusMap(1.0, n * model.lam, 0.0, 1.0)


def reduce_to_fd(model: FuchsianModel, z: HPoint, max_iter: int = 4096):
    """Translate/invert z into the closed fundamental domain.

    Returns (z', g) with g(z) = z'; the tile containing z is g^{-1}(FD).
    Ties on the walls land on the Re <= halfwidth side via floor rounding.
    """
    g = model.identity()
    _, s_gen = model.generators
    x, y = z.x, z.y
    for _ in range(max_iter):
        n = math.floor(x / model.lam + 0.5)
        if n != 0:
            g = _translation(model, -int(n)).compose(g)
            x -= n * model.lam
            continue
        r2 = x * x + y * y
        if r2 < 1.0 - 1e-15:
            g = s_gen.compose(g)
            x, y = -x / r2, y / r2
            continue
        return HPoint(x, y), g
    raise RuntimeError("fundamental-domain reduction did not terminate")


def tile_key(model: FuchsianModel, g) -> tuple:
    """Hashable identity of a tile: exact entries, or a quantized probe image."""
    if model.exact:
        return g.entries
    w = g.apply_complex(complex(0.1234567, 1.2345678))
    return (round(w.real * 1e9), round(w.imag * 1e9))


def coset_key(model: FuchsianModel, g):
    """Canonical representative of the left coset g<elliptic_gen>.

    Exact models: the lexicographically least sign-canonical matrix among
    g E^j, equal keys iff equal cosets.  Float models: the orbit point
    g(fixed point) quantized to a 1e-9 grid (adequate at desk scale).
    """
    if model.exact:
        e = model.elliptic_gen
        best = None
        cur = g
        for _ in range(model.k):
            cand = cur.entries
            if best is None or cand < best:
                best = cand
            cur = cur.compose(e)
        return best
    q = g.apply_complex(model.elliptic_fixed_point)
    return (round(q.real * 1e9), round(q.imag * 1e9))


def neighbor_ring(model: FuchsianModel, tiles, m: int):
    """Tiles within combinatorial distance m of the input set.

    Combinatorial distance counts right multiplications by the translation,
    its inverse, or the inversion.  Returns a list including the inputs,
    deduplicated, in deterministic order.
    """
    if m < 0:
        raise ValueError("ring radius must be nonnegative")
    t_gen, s_gen = model.generators
    steps = (t_gen, t_gen.inverse(), s_gen)
    seen: dict[tuple, object] = {}
    for g in tiles:
        seen.setdefault(tile_key(model, g), g)
    frontier = list(seen.values())
    for _ in range(m):
        new = []
        for g in frontier:
            for w in steps:
                h = g.compose(w)
                key = tile_key(model, h)
                if key not in seen:
                    seen[key] = h
                    new.append(h)
        frontier = new
        if not frontier:
            break
    return [seen[k] for k in sorted(seen)]


def tile_walk(model: FuchsianModel, geod: Geodesic, start: HPoint, length: float):
    """Ordered tiles whose interiors the geodesic segment crosses.

    The segment runs from the start point toward the forward endpoint for
    the given arc length.  Group elements are exact for the modular group
    (arbitrary-precision composition across re-anchored chunks) and float
    matrices for Hecke models.
    """
    if length <= 0.0:
        raise ValueError("walk length must be positive")
    if model.exact:
        return _tile_walk_modular(model, geod, start, length)
    return _tile_walk_generic(model, geod, start, length)


def _tile_walk_modular(model: FuchsianModel, geod: Geodesic, start: HPoint, length: float):
    anchor = IntMatrix.identity()
    f, b = geod.fwd, geod.bwd
    x, y = start.x, start.y
    remaining = length
    out: list[IntMatrix] = []
    guard = 0
    while True:
        tiles, _geo, state, status = kernels.walk_segment(f, b, x, y, remaining)
        rows = [IntMatrix(*map(int, row)) for row in tiles]
        for i, g in enumerate(rows):
            gg = anchor.compose(g)
            if i == 0 and out and gg.entries == out[-1].entries:
                continue  # chunk junction repeats the wall tile
            out.append(gg)
        if status == kernels.STATUS_DONE:
            return out
        if status == kernels.STATUS_STUCK:
            raise RuntimeError("tile walk found no forward exit (degenerate geodesic)")
        # overflow: re-anchor at the last tile and continue in its frame
        if not rows:
            # reduction itself overflowed; redo it with exact integers
            red, g0 = reduce_to_fd(model, HPoint(x, y))
            anchor = anchor.compose(g0.inverse())
            f, b = g0.apply_boundary(f), g0.apply_boundary(b)
            x, y = red.x, red.y
        else:
            last = rows[-1]
            anchor = anchor.compose(last)
            f, b, x, y, walked = state
            remaining -= walked
        guard += 1
        if guard > 10_000:
            raise RuntimeError("tile walk failed to make progress")


def _raw_apply_complex(g, z: complex) -> complex:
    a, b, c, d = g
    return (a * z + b) / (c * z + d)


def _generic_walk_frames(model: FuchsianModel, f: float, b: float,
                         x0: float, y0: float, length: float,
                         max_steps: int = 1_000_000):
    """Float-matrix walk with per-tile frame data.

    Returns a list of (g, pf, pb, px, t_entry): the tile element as a raw
    entry tuple, the geodesic endpoints and entry point pulled back to
    that tile's frame, and the arc length from the start at which the tile
    was entered.  Shares the kernel's stepping scheme, with the wall
    positions parameterized by the model halfwidth.

    Tile tuples are composed without determinant normalization and only
    rescaled projectively: recomputing the determinant of a long float
    product cancels catastrophically, while the product itself stays a
    perfectly good projective representative.  Wall-tangency stalls are
    cleared by nudging an epsilon of arc forward and re-reducing.
    """
    w = model.fd_halfwidth
    lam = model.lam
    red, g0 = reduce_to_fd(model, HPoint(x0, y0))
    inv = g0.inverse()
    g = (inv.a, inv.b, inv.c, inv.d)
    pf, pb = g0.apply_boundary(f), g0.apply_boundary(b)
    px, py = red.x, red.y
    walked = 0.0
    out = [(g, pf, pb, px, 0.0)]
    nudges = 0
    for _ in range(max_steps):
        if math.isinf(pf):
            return out  # straight out the cusp: stays in this tile
        best_dx, wall, xe, ye = math.inf, -1, 0.0, 0.0
        if math.isinf(pb):
            yy = 1.0 - pf * pf
            if yy > 0.0 and py > math.sqrt(yy) * (1.0 + 1e-15):
                wall, xe, ye = 2, pf, math.sqrt(yy)
                step = math.log(py / ye)
            else:
                raise RuntimeError("generic tile walk found no forward exit")
            if walked + step >= length:
                return out
        else:
            s = 1.0 if pf > pb else -1.0
            for wx in (w, -w):
                yy = (pf - wx) * (wx - pb)
                if yy > 0.0:
                    dx = (wx - px) * s
                    if 1e-13 < dx < best_dx:
                        best_dx, wall, xe, ye = dx, (0 if wx > 0 else 1), wx, math.sqrt(yy)
            den = pf + pb
            if den != 0.0:
                xc = (1.0 + pf * pb) / den
                yy = -(xc - pf) * (xc - pb)
                if yy > 0.0 and abs(xc) < 1.0:
                    dx = (xc - px) * s
                    if 1e-13 < dx < best_dx:
                        best_dx, wall, xe, ye = dx, 2, xc, math.sqrt(yy)
            if wall < 0:
                # stalled on a wall: advance an epsilon of arc, re-reduce
                nudges += 1
                if nudges > 1000:
                    raise RuntimeError("generic tile walk found no forward exit")
                t_here = 0.5 * math.log((px - pb) / (pf - px)) if pf > pb \
                    else 0.5 * math.log((pb - px) / (px - pf))
                u = math.exp(2.0 * (t_here + 1e-9))
                px = (pb + pf * u) / (1.0 + u)
                py = math.sqrt(max(-(px - pf) * (px - pb), 1e-300))
                for _r in range(256):
                    n = math.floor(px / lam + 0.5)
                    if n != 0:
                        ga, gb_, gc, gd = g
                        g = (ga, ga * n * lam + gb_, gc, gc * n * lam + gd)
                        pf, pb, px = pf - n * lam, pb - n * lam, px - n * lam
                        continue
                    r2 = px * px + py * py
                    if r2 < 1.0 - 1e-15:
                        ga, gb_, gc, gd = g
                        g = (gb_, -ga, gd, -gc)
                        pf = math.inf if pf == 0.0 else (0.0 if math.isinf(pf) else -1.0 / pf)
                        pb = math.inf if pb == 0.0 else (0.0 if math.isinf(pb) else -1.0 / pb)
                        px, py = -px / r2, py / r2
                        continue
                    break
                out.append((g, pf, pb, px, walked))
                continue
            d2 = (xe - px) ** 2 + (ye - py) ** 2
            step = math.acosh(1.0 + d2 / (2.0 * py * ye))
            if walked + step >= length:
                return out
        walked += step
        ga, gb_, gc, gd = g
        if wall == 0:     # g . T
            g = (ga, ga * lam + gb_, gc, gc * lam + gd)
            pf, pb = pf - lam, pb - lam
            px, py = xe - lam, ye
        elif wall == 1:   # g . T^-1
            g = (ga, gb_ - ga * lam, gc, gd - gc * lam)
            pf, pb = pf + lam, pb + lam
            px, py = xe + lam, ye
        else:             # g . S
            g = (gb_, -ga, gd, -gc)
            pf = math.inf if pf == 0.0 else (0.0 if math.isinf(pf) else -1.0 / pf)
            pb = math.inf if pb == 0.0 else (0.0 if math.isinf(pb) else -1.0 / pb)
            r2 = xe * xe + ye * ye
            px, py = -xe / r2, ye / r2
        scale = max(abs(g[0]), abs(g[1]), abs(g[2]), abs(g[3]))
        if scale > 1e8:
            g = (g[0] / scale, g[1] / scale, g[2] / scale, g[3] / scale)
        out.append((g, pf, pb, px, walked))
    raise RuntimeError("generic tile walk exceeded the step budget")


def _tile_walk_generic(model: FuchsianModel, geod: Geodesic, start: HPoint,
                       length: float):
    rows = _generic_walk_frames(model, geod.fwd, geod.bwd, start.x, start.y, length)
    out = []
    for (g, _pf, _pb, _px, _t) in rows:
        a, b, c, d = g
        det = a * d - b * c
        if not det > 0.0:
            raise RuntimeError(
                "float tile matrices degenerated; the walk is too long for "
                "normalized group elements (use shorter windows)")
        out.append(MobiusMap(a, b, c, d))
    return out
