# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the modular-tiling hot path.

Exact mirror of the pure-Python module ``_ref`` (same contract, same
arithmetic, same constants); see there for documentation.
"""

import math

import numpy as np

from libc.math cimport acosh, exp, fabs, floor, log, sqrt

IS_COMPILED = True

LIMIT = 1 << 48
cdef double _DLIMIT = <double>(1 << 48)
cdef double _EPS_PROGRESS = 1e-13
cdef double _NUDGE = 1e-12
cdef double _INF = float("inf")

STATUS_DONE = 0
STATUS_OVERFLOW = 1
STATUS_STUCK = 2


cdef inline double _inv_boundary(double x) nogil:
    if x == _INF or x == -_INF:
        return 0.0
    if x == 0.0:
        return _INF
    return -1.0 / x


cdef inline double _param(double f, double b, double x) nogil:
    if f > b:
        return 0.5 * log((x - b) / (f - x))
    return 0.5 * log((b - x) / (x - f))


cdef inline bint _is_inf(double x) nogil:
    return x == _INF or x == -_INF


def walk_segment(double f, double b, double x0, double y0, double length):
    """See _ref.walk_segment."""
    cdef long long ga = 1, gb = 0, gc = 0, gd = 1
    cdef long long na, nb, nc, nd, ni
    cdef double pf = f, pb = b, px = x0, py = y0
    cdef double walked = 0.0
    cdef double n, r2, u, x, yy, s, best_dx, dx, xe, ye, t_exit, xc, den
    cdef double d2, t_here, x_end, y_end, v, yc, w
    cdef int wall, i, it
    cdef Py_ssize_t count = 0, cap = 256

    if _is_inf(pf) or _is_inf(pb):
        py = py * exp(-_NUDGE if not _is_inf(pf) else _NUDGE)
    else:
        u = exp(2.0 * (_param(pf, pb, px) + _NUDGE))
        px = (pb + pf * u) / (1.0 + u)
        yy = -(px - pf) * (px - pb)
        py = sqrt(yy if yy > 0.0 else 0.0)

    for it in range(4096):
        n = floor(px + 0.5)
        if n != 0.0:
            if fabs(<double>ga * n + <double>gb) >= _DLIMIT or \
               fabs(<double>gc * n + <double>gd) >= _DLIMIT:
                return (np.zeros((0, 4), dtype=np.int64), np.zeros((0, 4)),
                        (pf, pb, px, py, 0.0), STATUS_OVERFLOW)
            ni = <long long>n
            gb = ga * ni + gb
            gd = gc * ni + gd
            pf -= n
            pb -= n
            px -= n
            continue
        r2 = px * px + py * py
        if r2 < 1.0 - 1e-15:
            na, nb, nc, nd = gb, -ga, gd, -gc
            ga, gb, gc, gd = na, nb, nc, nd
            pf = _inv_boundary(pf)
            pb = _inv_boundary(pb)
            px = -px / r2
            py = py / r2
            continue
        break
    _canon4(&ga, &gb, &gc, &gd)

    tiles_arr = np.empty((cap, 4), dtype=np.int64)
    geo_arr = np.empty((cap, 4), dtype=np.float64)
    cdef long long[:, ::1] tiles = tiles_arr
    cdef double[:, ::1] geo = geo_arr
    tiles[0, 0] = ga; tiles[0, 1] = gb; tiles[0, 2] = gc; tiles[0, 3] = gd
    geo[0, 0] = pf; geo[0, 1] = pb; geo[0, 2] = px; geo[0, 3] = 0.0
    count = 1

    while True:
        if _is_inf(pf):
            y_end = py * exp(length - walked)
            return (tiles_arr[:count].copy(), geo_arr[:count].copy(),
                    (pf, pb, px, y_end, length), STATUS_DONE)
        if _is_inf(pb):
            v = pf
            yy = 1.0 - v * v
            yc = sqrt(yy) if yy > 0.0 else 0.0
            if not (yc > 0.0 and py > yc * (1.0 + 1e-15)):
                return (tiles_arr[:count].copy(), geo_arr[:count].copy(),
                        (pf, pb, v, py, walked), STATUS_STUCK)
            t_exit = log(py / yc)
            if walked + t_exit >= length:
                y_end = py * exp(-(length - walked))
                return (tiles_arr[:count].copy(), geo_arr[:count].copy(),
                        (pf, pb, v, y_end, length), STATUS_DONE)
            wall = 2
            xe = v
            ye = yc
        else:
            s = 1.0 if pf > pb else -1.0
            best_dx = _INF
            wall = -1
            xe = 0.0
            ye = 0.0
            for i in range(2):
                w = 0.5 if i == 0 else -0.5
                yy = (pf - w) * (w - pb)
                if yy > 0.0:
                    dx = (w - px) * s
                    if _EPS_PROGRESS < dx < best_dx:
                        best_dx = dx
                        wall = i
                        xe = w
                        ye = sqrt(yy)
            den = pf + pb
            if den != 0.0:
                xc = (1.0 + pf * pb) / den
                yy = -(xc - pf) * (xc - pb)
                if yy > 0.0 and fabs(xc) < 1.0:
                    dx = (xc - px) * s
                    if _EPS_PROGRESS < dx < best_dx:
                        best_dx = dx
                        wall = 2
                        xe = xc
                        ye = sqrt(yy)
            if wall < 0:
                return (tiles_arr[:count].copy(), geo_arr[:count].copy(),
                        (pf, pb, px, py, walked), STATUS_STUCK)
            d2 = (xe - px) * (xe - px) + (ye - py) * (ye - py)
            t_exit = acosh(1.0 + d2 / (2.0 * py * ye))
            if walked + t_exit >= length:
                t_here = _param(pf, pb, px)
                u = exp(2.0 * (t_here + (length - walked)))
                x_end = (pb + pf * u) / (1.0 + u)
                yy = -(x_end - pf) * (x_end - pb)
                y_end = sqrt(yy if yy > 0.0 else 0.0)
                return (tiles_arr[:count].copy(), geo_arr[:count].copy(),
                        (pf, pb, x_end, y_end, length), STATUS_DONE)

        if wall == 0:
            na = ga; nb = ga + gb; nc = gc; nd = gc + gd
        elif wall == 1:
            na = ga; nb = gb - ga; nc = gc; nd = gd - gc
        else:
            na = gb; nb = -ga; nc = gd; nd = -gc
        if (fabs(<double>na) >= _DLIMIT or fabs(<double>nb) >= _DLIMIT
                or fabs(<double>nc) >= _DLIMIT or fabs(<double>nd) >= _DLIMIT):
            return (tiles_arr[:count].copy(), geo_arr[:count].copy(),
                    (pf, pb, xe, ye, walked + t_exit), STATUS_OVERFLOW)
        walked += t_exit
        ga, gb, gc, gd = na, nb, nc, nd
        _canon4(&ga, &gb, &gc, &gd)
        if wall == 0:
            pf -= 1.0; pb -= 1.0
            px = xe - 1.0; py = ye
        elif wall == 1:
            pf += 1.0; pb += 1.0
            px = xe + 1.0; py = ye
        else:
            pf = _inv_boundary(pf)
            pb = _inv_boundary(pb)
            px = -xe; py = ye

        if count == cap:
            cap *= 2
            tiles_arr = np.concatenate([tiles_arr, np.empty_like(tiles_arr)])
            geo_arr = np.concatenate([geo_arr, np.empty_like(geo_arr)])
            tiles = tiles_arr
            geo = geo_arr
        tiles[count, 0] = ga; tiles[count, 1] = gb
        tiles[count, 2] = gc; tiles[count, 3] = gd
        geo[count, 0] = pf; geo[count, 1] = pb
        geo[count, 2] = px; geo[count, 3] = walked
        count += 1


cdef inline void _canon4(long long *a, long long *b, long long *c, long long *d) nogil:
    cdef long long lead = a[0]
    if lead == 0:
        lead = b[0]
        if lead == 0:
            lead = c[0]
            if lead == 0:
                lead = d[0]
    if lead < 0:
        a[0] = -a[0]; b[0] = -b[0]; c[0] = -c[0]; d[0] = -d[0]


def _ball(int m):
    """Products of at most m wall generators, identity first, stable order."""
    out = [(1, 0, 0, 1)]
    seen = {out[0]}
    frontier = [out[0]]
    for _ in range(m):
        new = []
        for (a, b, c, d) in frontier:
            for nbr in ((a, a + b, c, c + d), (a, b - a, c, d - c), (b, -a, d, -c)):
                t = _canon_py(*nbr)
                if t not in seen:
                    seen.add(t)
                    out.append(t)
                    new.append(t)
        frontier = new
    return out


def _canon_py(a, b, c, d):
    for e in (a, b, c, d):
        if e != 0:
            if e < 0:
                return (-a, -b, -c, -d)
            break
    return (a, b, c, d)


def collect_candidates(tiles, geo, int m, double fp_x, double fp_y,
                       double sinh_r, double tol=1e-9):
    """See _ref.collect_candidates."""
    rel_list = []
    for (a, b, c, d) in _ball(m):
        for h in ((a, b, c, d), (a, b - a, c, d - c)):
            if h not in rel_list:
                rel_list.append(h)
    rel_arr = np.asarray(rel_list, dtype=np.int64)
    cdef long long[:, ::1] rel = rel_arr
    cdef Py_ssize_t n_rel = rel.shape[0]

    tiles_c = np.ascontiguousarray(tiles, dtype=np.int64)
    geo_c = np.ascontiguousarray(geo, dtype=np.float64)
    cdef long long[:, ::1] tv = tiles_c.reshape(-1, 4)
    cdef double[:, ::1] gv = geo_c.reshape(-1, 4)
    cdef Py_ssize_t n = tv.shape[0], i, j
    cdef double pf, pb, span, gate, g_hi, g_lo, v, xl
    cdef double den_re, den_im, dd, qx, qy, sd
    cdef long long ga, gb, gc, gd, ha, hb, hc, hd, ca, cb, cc, cd
    cdef long long r0a, r0b, r0c, r0d, r1a, r1b, r1c, r1d, r2a, r2b, r2c, r2d

    seen = set()
    out_idx, out_rel, out_rep, out_qx, out_qy = [], [], [], [], []
    xl = fp_x - 1.0
    for i in range(n):
        pf = gv[i, 0]
        pb = gv[i, 1]
        if _is_inf(pf) or _is_inf(pb):
            v = pb if _is_inf(pf) else pf
            gate = min(fabs(fp_x - v), fabs(xl - v)) / fp_y
            span = _INF
        else:
            span = fabs(pf - pb)
            g_hi = fabs((fp_x - pf) * (fp_x - pb) + fp_y * fp_y) / (span * fp_y)
            g_lo = fabs((xl - pf) * (xl - pb) + fp_y * fp_y) / (span * fp_y)
            gate = g_hi if g_hi < g_lo else g_lo
        if gate > sinh_r + tol:
            continue
        ga = tv[i, 0]; gb = tv[i, 1]; gc = tv[i, 2]; gd = tv[i, 3]
        for j in range(n_rel):
            ha = rel[j, 0]; hb = rel[j, 1]; hc = rel[j, 2]; hd = rel[j, 3]
            ca = ga * ha + gb * hc
            cb = ga * hb + gb * hd
            cc = gc * ha + gd * hc
            cd = gc * hb + gd * hd
            r0a, r0b, r0c, r0d = ca, cb, cc, cd
            _canon4(&r0a, &r0b, &r0c, &r0d)
            r1a, r1b, r1c, r1d = ca + cb, -ca, cc + cd, -cc
            _canon4(&r1a, &r1b, &r1c, &r1d)
            r2a, r2b, r2c, r2d = cb, -ca - cb, cd, -cc - cd
            _canon4(&r2a, &r2b, &r2c, &r2d)
            rep = min((r0a, r0b, r0c, r0d), (r1a, r1b, r1c, r1d),
                      (r2a, r2b, r2c, r2d))
            if rep in seen:
                continue
            seen.add(rep)
            den_re = hc * fp_x + hd
            den_im = hc * fp_y
            dd = den_re * den_re + den_im * den_im
            qx = ((ha * fp_x + hb) * den_re + ha * fp_y * den_im) / dd
            qy = fp_y / dd
            if span == _INF:
                v = pb if _is_inf(pf) else pf
                sd = fabs(qx - v) / qy
            else:
                sd = fabs((qx - pf) * (qx - pb) + qy * qy) / (span * qy)
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
