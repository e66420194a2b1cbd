import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import central_gradient, eig_min, eq2_minimum
from vprect import _kernels
from vprect.consistency import (
    DegenerateEigenvalueError,
    InlierCost,
    ScatterMatrix,
    consistency,
    consistency_gradient,
    consistency_values,
    inlier_masks,
    lambda_min,
    robust_cost,
    robust_cost_and_grad,
    scatter,
)
from vprect.geom import Segment

coord = st.floats(-1000, 1000, allow_nan=False, allow_infinity=False)


def seg(x1, y1, x2, y2):
    return Segment.from_coords(x1, y1, x2, y2)


class TestScatter:
    def test_hand_sum(self):
        assert scatter((0, 0), seg(1, 1, 2, -1)) == (5, -1, 2)

    def test_one_zero_vector(self):
        assert scatter((1, 1), seg(1, 1, 2, 1)) == (1, 0, 0)

    def test_translation_invariant(self):
        t = (100, -50)
        a = scatter((3, 4), seg(1, 1, 2, -1))
        b = scatter((3 + t[0], 4 + t[1]), seg(1 + t[0], 1 + t[1], 2 + t[0], -1 + t[1]))
        assert a == b

    @given(coord, coord, coord, coord, coord, coord)
    def test_psd(self, vx, vy, a, b, c, d):
        assume((a, b) != (c, d))
        M = scatter((vx, vy), seg(a, b, c, d))
        assert M.a >= 0 and M.c >= 0
        assert M.a * M.c - M.b**2 >= -1e-9 * (M.a + M.c) ** 2


class TestLambdaMin:
    def test_characteristic_roots(self):
        assert lambda_min(ScatterMatrix(5, -1, 2)) == pytest.approx((7 - math.sqrt(13)) / 2, abs=1e-14)

    def test_isotropic(self):
        assert lambda_min(ScatterMatrix(3.5, 0, 3.5)) == 3.5

    def test_rank_one(self):
        assert lambda_min(ScatterMatrix(1, 0, 0)) == 0.0

    def test_clamped_at_zero(self):
        # exactly singular matrix whose closed form rounds below zero
        a, c = 1e8 + 1, 1e-8
        assert lambda_min(ScatterMatrix(a, math.sqrt(a * c), c)) >= 0.0


class TestConsistency:
    def test_collinear_with_v(self):
        assert consistency((0, 0), seg(1, 0, 2, 0)) == 0.0
        assert consistency((0, 0), seg(1, 1, -1, -1)) == 0.0

    def test_hand_value(self):
        assert consistency((0, 0), seg(1, 1, 2, -1)) == pytest.approx((7 - math.sqrt(13)) / 2, rel=1e-14)

    def test_matches_angle_search(self):
        assert consistency((0, 0), seg(1, 1, 2, -1)) == pytest.approx(eq2_minimum((0, 0), ((1, 1), (2, -1))), abs=1e-9)

    @given(coord, coord, coord, coord, coord, coord)
    @settings(max_examples=300)
    def test_matches_lapack(self, vx, vy, a, b, c, d):
        assume((a, b) != (c, d))
        ref = eig_min((vx, vy), ((a, b), (c, d)))
        val = consistency((vx, vy), seg(a, b, c, d))
        # eigvalsh is backward stable: its error is relative to |M|, not to lambda_min
        M = scatter((vx, vy), seg(a, b, c, d))
        assert val >= 0
        assert abs(val - ref) <= 1e-12 * (M.a + M.c) + 1e-12

    @given(coord, coord, coord, coord, coord, coord, st.floats(0, 360), coord, coord)
    @settings(max_examples=200)
    def test_rigid_motion_invariant(self, vx, vy, a, b, c, d, ang, tx, ty):
        assume((a, b) != (c, d))
        t = math.radians(ang)
        R = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])

        def move(p):
            return R @ np.asarray(p, float) + (tx, ty)

        v2, p1, p2 = move((vx, vy)), move((a, b)), move((c, d))
        assume(tuple(p1) != tuple(p2))
        M = scatter((vx, vy), seg(a, b, c, d))
        base = consistency((vx, vy), seg(a, b, c, d))
        moved = consistency(v2, Segment(tuple(p1), tuple(p2)))
        assert abs(moved - base) <= 1e-9 * (M.a + M.c) + 1e-9

    def test_zero_iff_collinear(self, rng):
        for _ in range(200):
            v = rng.uniform(-100, 100, 2)
            u = rng.standard_normal(2)
            t1, t2 = rng.uniform(1, 50, 2)
            s = Segment(tuple(v + t1 * u), tuple(v + (t1 + t2) * u))
            assert consistency(v, s) <= 1e-9
            n = np.array([-u[1], u[0]])
            off = Segment(tuple(v + t1 * u + n), tuple(v + (t1 + t2) * u))
            assert consistency(v, off) > 1e-9

    @pytest.mark.parametrize("v", [(1e7, 1e5 + 3.0), (-3e6, 2e6), (5e8, -1e3)])
    def test_far_point_is_accurate(self, v):
        # 50-digit reference: the textbook closed form loses everything here
        mp.mp.dps = 50
        p = [(0, 0), (100, 1)]
        d = [(mp.mpf(x) - mp.mpf(v[0]), mp.mpf(y) - mp.mpf(v[1])) for x, y in p]
        a = sum(x * x for x, _ in d)
        b = sum(x * y for x, y in d)
        c = sum(y * y for _, y in d)
        ref = (a + c) / 2 - mp.sqrt(((a - c) / 2) ** 2 + b * b)
        assert consistency(v, seg(0, 0, 100, 1)) == pytest.approx(float(ref), rel=1e-12)

    def test_values_matrix_shape(self, rng):
        segs = rng.uniform(-100, 100, (7, 2, 2))
        pts = rng.uniform(-100, 100, (5, 2))
        M = consistency_values(pts, segs)
        assert M.shape == (5, 7)
        assert consistency_values(pts[0], segs).shape == (7,)
        for i in range(5):
            for j in range(7):
                assert M[i, j] == pytest.approx(eig_min(pts[i], segs[j]), abs=1e-9 * (1 + np.abs(segs[j] - pts[i]).max() ** 2))
        assert np.array_equal(inlier_masks(pts, segs, 50.0), M <= 50.0)


class TestRobustCost:
    def test_zero(self):
        assert robust_cost((0, 0), [seg(1, 0, 2, 0)], 1.0) == 0.0

    def test_capped(self):
        assert robust_cost((0, 0), [seg(1, 1, 2, -1)], 1.0) == 1.0

    def test_mixed(self):
        assert robust_cost((0, 0), [seg(1, 0, 2, 0), seg(1, 1, 2, -1)], 1.0) == 1.0

    def test_preconditions(self):
        with pytest.raises(ValueError):
            robust_cost((0, 0), [], 1.0)
        with pytest.raises(ValueError):
            robust_cost((0, 0), [seg(0, 0, 1, 1)], 0.0)

    @given(st.lists(st.tuples(coord, coord, coord, coord), min_size=1, max_size=12), coord, coord, st.floats(0.01, 100))
    def test_bounded_by_count(self, rows, vx, vy, T):
        rows = [r for r in rows if (r[0], r[1]) != (r[2], r[3])]
        assume(rows)
        c = robust_cost((vx, vy), rows, T)
        assert 0.0 <= c <= len(rows) * T * (1 + 1e-12)

    def test_cost_and_grad_agrees(self, rng):
        segs = rng.uniform(-100, 100, (10, 2, 2))
        v = rng.uniform(-50, 50, 2)
        f, g = robust_cost_and_grad(v, segs, 30.0)
        assert f == pytest.approx(robust_cost(v, segs, 30.0), rel=1e-12)
        fd = central_gradient(lambda x: robust_cost(x, segs, 30.0), v, 1e-5)
        assert np.allclose(g, fd, rtol=1e-4, atol=1e-5)


class TestGradient:
    def test_at_minimum(self):
        g = consistency_gradient((0, 0), seg(1, 0, 2, 0))
        assert g == (0.0, 0.0) or np.allclose(g, 0.0, atol=1e-15)

    def test_isotropic_raises(self):
        # endpoints (1,0) and (0,1) about the origin: scatter = I
        with pytest.raises(DegenerateEigenvalueError):
            consistency_gradient((0, 0), seg(1, 0, 0, 1))

    def test_matches_finite_differences(self, rng):
        for _ in range(300):
            v = rng.uniform(-1000, 1000, 2)
            p = rng.uniform(-1000, 1000, (2, 2))
            s = Segment(tuple(p[0]), tuple(p[1]))
            h = 1e-5 * (1 + np.linalg.norm(v))
            fd = central_gradient(lambda x: consistency(x, s), v, h)
            g = np.array(consistency_gradient(v, s))
            assert np.linalg.norm(g - fd) <= 1e-4 * max(np.linalg.norm(fd), 1e-8)

    def test_compiled_kernel_matches(self, rng):
        for _ in range(300):
            v = rng.uniform(-1000, 1000, 2)
            p = rng.uniform(-1000, 1000, (2, 2))
            s = Segment(tuple(p[0]), tuple(p[1]))
            lam, gx, gy = _kernels.value_grad(v[0], v[1], p[0, 0], p[0, 1], p[1, 0], p[1, 1])
            g = np.array(consistency_gradient(v, s))
            assert lam == consistency(v, s)
            assert np.linalg.norm([gx - g[0], gy - g[1]]) <= 1e-9 * max(np.linalg.norm(g), 1e-6)

    def test_kernel_falls_back_at_tie(self):
        lam, gx, gy = _kernels.value_grad(0.0, 0.0, 1.0, 0.0, 0.0, 1.0)
        assert lam == pytest.approx(1.0)
        assert math.isfinite(gx) and math.isfinite(gy)


class TestInlierCost:
    def test_matches_per_candidate_sum(self, rng):
        segs = rng.uniform(-200, 200, (25, 2, 2))
        masks = rng.random((6, 25)) < 0.5
        masks[2] = False
        cost = InlierCost(segs, masks, 40.0)
        X = rng.uniform(-100, 100, (6, 2))
        F, G = cost(np.arange(6), X)
        for k in range(6):
            if masks[k].any():
                f, g = robust_cost_and_grad(X[k], segs[masks[k]], 40.0)
            else:
                f, g = 0.0, np.zeros(2)
            assert F[k] == pytest.approx(f, rel=1e-12, abs=1e-12)
            assert np.allclose(G[k], g, rtol=1e-12, atol=1e-12)

    def test_subset_and_repeats(self, rng):
        segs = rng.uniform(-200, 200, (10, 2, 2))
        masks = rng.random((4, 10)) < 0.6
        cost = InlierCost(segs, masks, 40.0)
        X = rng.uniform(-100, 100, (4, 2))
        F, G = cost(np.arange(4), X)
        F2, G2 = cost(np.array([3, 1, 3]), X[[3, 1, 3]])
        assert np.array_equal(F2, F[[3, 1, 3]]) and np.array_equal(G2, G[[3, 1, 3]])
