"""Compiled and pure-Python kernels must agree bit for bit."""

import math

import numpy as np
import pytest

from coneflow._kernels import _ref

try:
    from coneflow._kernels import _fast
except ImportError:
    _fast = None

needs_fast = pytest.mark.skipif(_fast is None, reason="compiled kernel not built")

FP_X, FP_Y = 0.5, math.sqrt(3.0) / 2.0
SINH_R3 = 1.0 / math.sqrt(3.0)


def random_cases(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        f = rng.uniform(-4, 4)
        b = rng.uniform(-4, 4)
        if abs(f - b) < 1e-3:
            continue
        x = (f + b) / 2 + rng.uniform(-0.3, 0.3) * abs(f - b) / 2
        yy = -(x - f) * (x - b)
        if yy <= 0:
            continue
        yield f, b, x, math.sqrt(yy), rng.uniform(0.5, 60.0)


class TestRefSelfConsistency:
    def test_walk_starts_in_fd(self):
        for f, b, x, y, L in random_cases(50, 1):
            tiles, geo, state, status = _ref.walk_segment(f, b, x, y, L)
            assert status == _ref.STATUS_DONE
            assert len(tiles) == len(geo)
            # first tile's pulled entry point lies in the closed domain
            px = geo[0][2]
            assert abs(px) <= 0.5 + 1e-9

    def test_walk_geo_param_consistency(self):
        # entry parameters are increasing and match the walk ordering
        for f, b, x, y, L in random_cases(30, 2):
            _tiles, geo, _state, _status = _ref.walk_segment(f, b, x, y, L)
            ts = [row[3] for row in geo]
            assert all(t2 > t1 - 1e-12 for t1, t2 in zip(ts, ts[1:]))
            assert ts[0] == 0.0

    def test_overflow_resume_covers_walk(self):
        # a long walk split by overflow resumes without losing tiles
        f, b = (1 + math.sqrt(5)) / 2, -2 / (1 + math.sqrt(5))
        x, y = (f + b) / 2, (f - b) / 2
        total = 0
        remaining = 200.0
        guards = 0
        while remaining > 1e-9 and guards < 50:
            tiles, geo, state, status = _ref.walk_segment(f, b, x, y, remaining)
            total += len(tiles)
            if status == _ref.STATUS_DONE:
                break
            assert status == _ref.STATUS_OVERFLOW
            f, b, x, y, walked = state
            remaining -= walked
            guards += 1
        assert status == _ref.STATUS_DONE
        assert total > 150


@needs_fast
class TestCompiledMirrorsReference:
    def test_flags(self):
        assert _ref.IS_COMPILED is False
        assert _fast.IS_COMPILED is True
        assert _ref.LIMIT == _fast.LIMIT

    def test_walks_bitwise_equal(self):
        for f, b, x, y, L in random_cases(150, 3):
            r = _ref.walk_segment(f, b, x, y, L)
            c = _fast.walk_segment(f, b, x, y, L)
            assert r[3] == c[3]
            assert np.array_equal(r[0], c[0])
            assert np.array_equal(r[1], c[1])
            assert all(a == b2 for a, b2 in zip(r[2], c[2]))

    def test_vertical_walks_equal(self):
        for v in (-0.3, 0.0, 0.2):
            r = _ref.walk_segment(math.inf, v, v, 2.0, 5.0)
            c = _fast.walk_segment(math.inf, v, v, 2.0, 5.0)
            assert r[3] == c[3] and np.array_equal(r[0], c[0])
            assert all(a == b for a, b in zip(r[2], c[2]))
            r = _ref.walk_segment(v, math.inf, v, 2.0, 5.0)
            c = _fast.walk_segment(v, math.inf, v, 2.0, 5.0)
            assert r[3] == c[3] and np.array_equal(r[0], c[0])
            assert all(a == b for a, b in zip(r[2], c[2]))
            assert np.array_equal(r[1], c[1])

    @pytest.mark.parametrize("m", (0, 1, 2, 3))
    def test_candidates_bitwise_equal(self, m):
        for f, b, x, y, L in random_cases(40, 4 + m):
            tiles, geo, _state, _status = _ref.walk_segment(f, b, x, y, min(L, 30.0))
            r = _ref.collect_candidates(tiles, geo, m, FP_X, FP_Y, SINH_R3)
            c = _fast.collect_candidates(tiles, geo, m, FP_X, FP_Y, SINH_R3)
            for a, b2 in zip(r, c):
                assert np.array_equal(a, b2)

    def test_ball_agrees(self):
        for m in range(4):
            assert _ref._ball(m) == _fast._ball(m)
