"""Pure-Python reference kernels for the modular-tiling hot path.

Same contract as the compiled module ``_fast``; one of the two is selected
at import time by the package ``__init__``.  All matrices are rows
(a, b, c, d) of an integer determinant-one 2x2 matrix with the sign fixed
so the first nonzero entry is positive.

Numerical scheme: the walk maintains the geodesic pulled back to the frame
of the current tile by incremental single-generator moves, and reports
that local data per tile.  Candidate geometry is then evaluated in the
frame of the tile that discovered the candidate, where every quantity is
O(1)-conditioned; matrix entries never exceed 2**48 (the walk reports
overflow instead, and the caller re-anchors).

Status codes of walk_segment: 0 done, 1 overflow (resume after
re-anchoring at the returned state), 2 stuck (no forward exit found).
"""

from __future__ import annotations

import math

import numpy as np

IS_COMPILED = False

LIMIT = 1 << 48
_EPS_PROGRESS = 1e-13
_NUDGE = 1e-12

STATUS_DONE = 0
STATUS_OVERFLOW = 1
STATUS_STUCK = 2


def _canon(a, b, c, d):
    for e in (a, b, c, d):
        if e != 0:
            if e < 0:
                return (-a, -b, -c, -d)
            break
    return (a, b, c, d)


def _inv_boundary(x):
    """Boundary action of z -> -1/z with exact pole handling."""
    if math.isinf(x):
        return 0.0
    if x == 0.0:
        return math.inf
    return -1.0 / x


def _param(f, b, x):
    """Arc-length coordinate of the geodesic point over x, increasing toward f."""
    if f > b:
        return 0.5 * math.log((x - b) / (f - x))
    return 0.5 * math.log((b - x) / (x - f))


def _point_at(f, b, t):
    """Geodesic point at arc-length coordinate t (finite endpoints)."""
    u = math.exp(2.0 * t)
    x = (b + f * u) / (1.0 + u)
    yy = -(x - f) * (x - b)
    return x, math.sqrt(max(yy, 0.0))


def walk_segment(f, b, x0, y0, length):
    """Tiles of the modular tiling crossed by the geodesic (f, b) starting
    at the point (x0, y0) and moving toward f for the given arc length.

    Returns (tiles, geo, state, status):
      tiles  int64 (n, 4): tile matrices relative to the input frame, in
             crossing order, first row the tile containing the start point;
      geo    float64 (n, 4): per tile (pf, pb, px, t_entry) -- the geodesic
             endpoints and entry point pulled back to that tile's frame,
             and the arc length from the start at which it was entered;
      state  (pf, pb, px, py, walked) in the frame of the last tile;
      status done / overflow / stuck.

    The start point is nudged forward by an epsilon of arc so resumed
    walks never sit exactly on a wall.
    """
    ga, gb, gc, gd = 1, 0, 0, 1
    pf, pb, px, py = f, b, x0, y0
    walked = 0.0

    if math.isinf(pf) or math.isinf(pb):
        py = py * math.exp(-_NUDGE if not math.isinf(pf) else _NUDGE)
    else:
        px, py = _point_at(pf, pb, _param(pf, pb, px) + _NUDGE)

    empty = (np.zeros((0, 4), dtype=np.int64), np.zeros((0, 4)))
    for _ in range(4096):
        n = math.floor(px + 0.5)
        if n != 0:
            if abs(float(ga) * n + float(gb)) >= LIMIT or \
               abs(float(gc) * n + float(gd)) >= LIMIT:
                return empty[0], empty[1], (pf, pb, px, py, 0.0), STATUS_OVERFLOW
            ni = int(n)
            ga, gb, gc, gd = ga, ga * ni + gb, gc, gc * ni + gd
            pf, pb, px = pf - n, pb - n, px - n
            continue
        r2 = px * px + py * py
        if r2 < 1.0 - 1e-15:
            ga, gb, gc, gd = gb, -ga, gd, -gc
            pf, pb = _inv_boundary(pf), _inv_boundary(pb)
            px, py = -px / r2, py / r2
            continue
        break
    ga, gb, gc, gd = _canon(ga, gb, gc, gd)
    tiles = [(ga, gb, gc, gd)]
    geo = [(pf, pb, px, 0.0)]

    while True:
        if math.isinf(pf):
            # straight out the cusp: never leaves this tile
            y_end = py * math.exp(length - walked)
            return (np.asarray(tiles, dtype=np.int64), np.asarray(geo),
                    (pf, pb, px, y_end, length), STATUS_DONE)
        if math.isinf(pb):
            v = pf
            yy = 1.0 - v * v
            yc = math.sqrt(yy) if yy > 0.0 else 0.0
            if not (yc > 0.0 and py > yc * (1.0 + 1e-15)):
                return (np.asarray(tiles, dtype=np.int64), np.asarray(geo),
                        (pf, pb, v, py, walked), STATUS_STUCK)
            t_exit = math.log(py / yc)
            if walked + t_exit >= length:
                y_end = py * math.exp(-(length - walked))
                return (np.asarray(tiles, dtype=np.int64), np.asarray(geo),
                        (pf, pb, v, y_end, length), STATUS_DONE)
            wall, xe, ye = 2, v, yc
        else:
            s = 1.0 if pf > pb else -1.0
            best_dx, wall, xe, ye = math.inf, -1, 0.0, 0.0
            for w in (0.5, -0.5):
                yy = (pf - w) * (w - pb)
                if yy > 0.0:
                    dx = (w - px) * s
                    if _EPS_PROGRESS < dx < best_dx:
                        best_dx = dx
                        wall = 0 if w > 0.0 else 1
                        xe, ye = w, math.sqrt(yy)
            den = pf + pb
            if den != 0.0:
                xc = (1.0 + pf * pb) / den
                yy = -(xc - pf) * (xc - pb)
                if yy > 0.0 and abs(xc) < 1.0:
                    dx = (xc - px) * s
                    if _EPS_PROGRESS < dx < best_dx:
                        best_dx = dx
                        wall = 2
                        xe, ye = xc, math.sqrt(yy)
            if wall < 0:
                return (np.asarray(tiles, dtype=np.int64), np.asarray(geo),
                        (pf, pb, px, py, walked), STATUS_STUCK)
            d2 = (xe - px) * (xe - px) + (ye - py) * (ye - py)
            t_exit = math.acosh(1.0 + d2 / (2.0 * py * ye))
            if walked + t_exit >= length:
                t_here = _param(pf, pb, px)
                x_end, y_end = _point_at(pf, pb, t_here + (length - walked))
                return (np.asarray(tiles, dtype=np.int64), np.asarray(geo),
                        (pf, pb, x_end, y_end, length), STATUS_DONE)

        # Commit the crossing: multiply by the wall generator, pull the frame back.
        if wall == 0:      # Re = +1/2, neighbor g.T
            na, nb, nc, nd = ga, ga + gb, gc, gc + gd
            npf, npb = pf - 1.0, pb - 1.0
            npx, npy = xe - 1.0, ye
        elif wall == 1:    # Re = -1/2, neighbor g.T^-1
            na, nb, nc, nd = ga, gb - ga, gc, gd - gc
            npf, npb = pf + 1.0, pb + 1.0
            npx, npy = xe + 1.0, ye
        else:              # unit circle, neighbor g.S
            na, nb, nc, nd = gb, -ga, gd, -gc
            npf, npb = _inv_boundary(pf), _inv_boundary(pb)
            npx, npy = -xe, ye  # |exit| = 1 exactly on the wall
        if (abs(na) >= LIMIT or abs(nb) >= LIMIT or abs(nc) >= LIMIT
                or abs(nd) >= LIMIT):
            return (np.asarray(tiles, dtype=np.int64), np.asarray(geo),
                    (pf, pb, xe, ye, walked + t_exit), STATUS_OVERFLOW)
        walked += t_exit
        ga, gb, gc, gd = _canon(na, nb, nc, nd)
        pf, pb, px, py = npf, npb, npx, npy
        tiles.append((ga, gb, gc, gd))
        geo.append((pf, pb, px, walked))


def _ball(m):
    """Products of at most m wall generators, identity first, stable order."""
    out = [(1, 0, 0, 1)]
    seen = {out[0]}
    frontier = [out[0]]
    for _ in range(m):
        new = []
        for (a, b, c, d) in frontier:
            for nbr in ((a, a + b, c, c + d), (a, b - a, c, d - c), (b, -a, d, -c)):
                t = _canon(*nbr)
                if t not in seen:
                    seen.add(t)
                    out.append(t)
                    new.append(t)
        frontier = new
    return out


def collect_candidates(tiles, geo, m, fp_x, fp_y, sinh_r, tol=1e-9):
    """Cone-vertex cosets of the m-ring around the visited tiles whose orbit
    point lies within the threshold distance of the geodesic.

    Candidates for tile g are g h with h running over ball(m) composed with
    the two corner representatives; deduplication is by the canonical coset
    representative of g h in the walk frame (first discovery wins), and the
    distance test runs in the frame of the discovering tile.

    Returns (tile_idx, rel, rep, qx, qy):
      tile_idx int64 (K,): row into tiles/geo of the discovering tile;
      rel      int64 (K, 4): candidate relative to that tile;
      rep      int64 (K, 4): canonical coset representative of tile . rel;
      qx, qy   float64 (K,): orbit point in the discovering tile's frame.
    """
    rel_cands = []
    for (a, b, c, d) in _ball(m):
        for h in ((a, b, c, d), (a, b - a, c, d - c)):
            if h not in rel_cands:
                rel_cands.append(h)

    seen = set()
    out_idx, out_rel, out_rep, out_qx, out_qy = [], [], [], [], []
    n = len(tiles)
    for i in range(n):
        pf, pb = geo[i][0], geo[i][1]
        span = abs(pf - pb) if not (math.isinf(pf) or math.isinf(pb)) else math.inf
        # Cheap gate: a qualifying orbit point is always an own vertex of the
        # tile containing the closest approach, so sweep the ring only when
        # one of this tile's two vertices (+-1/2, sqrt(3)/2) is close enough.
        xl = fp_x - 1.0
        if math.isinf(span):
            v = pb if math.isinf(pf) else pf
            gate = min(abs(fp_x - v), abs(xl - v)) / fp_y
        else:
            g_hi = abs((fp_x - pf) * (fp_x - pb) + fp_y * fp_y) / (span * fp_y)
            g_lo = abs((xl - pf) * (xl - pb) + fp_y * fp_y) / (span * fp_y)
            gate = min(g_hi, g_lo)
        if gate > sinh_r + tol:
            continue
        ga, gb, gc, gd = (int(v) for v in tiles[i])
        for (ha, hb, hc, hd) in rel_cands:
            ca = ga * ha + gb * hc
            cb = ga * hb + gb * hd
            cc = gc * ha + gd * hc
            cd = gc * hb + gd * hd
            r0 = _canon(ca, cb, cc, cd)
            r1 = _canon(ca + cb, -ca, cc + cd, -cc)
            r2 = _canon(cb, -ca - cb, cd, -cc - cd)
            rep = min(r0, r1, r2)
            if rep in seen:
                continue
            seen.add(rep)
            den_re = hc * fp_x + hd
            den_im = hc * fp_y
            dd = den_re * den_re + den_im * den_im
            qx = ((ha * fp_x + hb) * den_re + ha * fp_y * den_im) / dd
            qy = fp_y / dd
            if math.isinf(span):
                v = pb if math.isinf(pf) else pf
                sd = abs(qx - v) / qy
            else:
                sd = abs((qx - pf) * (qx - pb) + qy * qy) / (span * qy)
            if sd <= sinh_r + tol:
                out_idx.append(i)
                out_rel.append((ha, hb, hc, hd))
                out_rep.append(rep)
                out_qx.append(qx)
                out_qy.append(qy)
    return (np.asarray(out_idx, dtype=np.int64),
            np.asarray(out_rel, dtype=np.int64).reshape(-1, 4),
            np.asarray(out_rep, dtype=np.int64).reshape(-1, 4),
            np.asarray(out_qx), np.asarray(out_qy))
