import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import homogeneous_ratio, project_direction, random_rotation
from vprect.geom import CameraIntrinsics, Point2, apply_homography_array, signed_area
from vprect.metrics import evaluate
from vprect.rectify import (
    CollinearVpsError,
    DegenerateRectificationError,
    FocalSource,
    focal_for_rectification,
    rectification_from_vps,
    rectify_pair,
)
from vprect.synth import generate, random_spec
from vprect.vp_detect import VpPair

UNIT = CameraIntrinsics(1.0, Point2(0.0, 0.0))


def assert_ideal(H, v, axis, tol=1e-6):
    ratio, xy = homogeneous_ratio(H, v)
    assert ratio < tol
    target = np.eye(2)[axis]
    assert abs(xy[0] * target[1] - xy[1] * target[0]) < tol


class TestExamples:
    def test_orthogonal_pair(self):
        r = rectification_from_vps((1, 0), (-1, 1), UNIT)
        assert np.allclose(r.R[:, 2], np.array([-1, -2, 1]) / math.sqrt(6), atol=1e-15)
        assert r.beta == 90.0
        assert np.array_equal(r.A, np.eye(3))
        assert_ideal(r.H, (1, 0), 0, 1e-15)
        assert_ideal(r.H, (-1, 1), 1, 1e-15)

    def test_flip_guard(self):
        r = rectification_from_vps((-1, 1), (1, 0), UNIT)
        # the raw normal (1, 2, -1)/sqrt(6) points away from the camera
        assert np.allclose(r.R[:, 2], np.array([-1, -2, 1]) / math.sqrt(6), atol=1e-15)
        assert np.linalg.det(r.R) == pytest.approx(1.0, abs=1e-12)

    def test_sixty_degree_shear(self):
        r = rectification_from_vps((1, 0), (0, 1), UNIT)
        assert r.beta == pytest.approx(60.0, abs=1e-12)
        s3 = math.sqrt(3)
        assert np.allclose(r.A, [[1, -1 / s3, 0], [0, 2 / s3, 0], [0, 0, 1]], atol=1e-15)
        assert_ideal(r.H, (1, 0), 0, 1e-12)
        assert_ideal(r.H, (0, 1), 1, 1e-12)

    def test_collinear(self):
        with pytest.raises(CollinearVpsError):
            rectification_from_vps((100, 20), (100, 20 + 1e-8), UNIT)

    def test_plane_through_optical_axis(self):
        # both directions have zero y component: plane normal is along y
        with pytest.raises(DegenerateRectificationError):
            rectification_from_vps((100, 0), (200, 0), UNIT)

    def test_beta_clamped(self):
        # directions 0.5 degrees apart but not collinear
        t = math.radians(0.5)
        r = rectification_from_vps((1, 0), (math.cos(t), math.sin(t)), CameraIntrinsics(1e-3, Point2(0, 0)))
        assert r.beta == 1.0


class TestFocal:
    pair = VpPair(Point2(1000, 0), Point2(0, 1000), 70.71, frozenset(), frozenset())
    bare = VpPair(Point2(1000, 0), Point2(0, 1000), None, frozenset(), frozenset())

    def test_provided(self):
        assert focal_for_rectification(self.pair, 1000.0, (640, 480)) == (1000.0, FocalSource.PROVIDED)

    def test_estimated(self):
        assert focal_for_rectification(self.pair, None, (640, 480)) == (70.71, FocalSource.ESTIMATED)

    def test_diagonal(self):
        assert focal_for_rectification(self.bare, None, (640, 480)) == (800.0, FocalSource.DIAGONAL)

    def test_bad_size(self):
        with pytest.raises(ValueError):
            focal_for_rectification(self.bare, None, (0, 480))

    def test_rectify_pair_records_source(self):
        assert rectify_pair(self.bare, (640, 480)).f_source is FocalSource.DIAGONAL
        assert rectify_pair(self.bare, (640, 480)).f_used == 800.0


def random_pair(seed, f_scale=1.0):
    rng = np.random.default_rng(seed)
    f = rng.uniform(300, 3000)
    p = rng.uniform(200, 600, 2)
    R = random_rotation(rng)
    vh = project_direction(f, p, R[:, 0])
    vv = project_direction(f, p, R[:, 1])
    return vh, vv, CameraIntrinsics(f * f_scale, Point2(*p)), R


@given(st.integers(0, 10_000), st.sampled_from([1.0, 0.7, 1.4]))
@settings(max_examples=200, deadline=None)
def test_vps_go_to_axis_ideal_points(seed, f_scale):
    vh, vv, K, _ = random_pair(seed, f_scale)
    r = rectification_from_vps(vh, vv, K)
    assert_ideal(r.H, vh, 0)
    assert_ideal(r.H, vv, 1)


@given(st.integers(0, 10_000), st.sampled_from([1.0, 0.6, 1.5]))
@settings(max_examples=200, deadline=None)
def test_rotation_orthonormal(seed, f_scale):
    vh, vv, K, _ = random_pair(seed, f_scale)
    r = rectification_from_vps(vh, vv, K)
    assert np.abs(r.R.T @ r.R - np.eye(3)).max() < 1e-9
    assert np.linalg.det(r.R) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(r.H, K.K @ r.A @ r.R.T @ K.K_inv, rtol=0, atol=0)


@given(st.integers(0, 10_000))
@settings(max_examples=100, deadline=None)
def test_true_focal_gives_identity_shear(seed):
    vh, vv, K, _ = random_pair(seed)
    r = rectification_from_vps(vh, vv, K)
    assert r.beta == pytest.approx(90.0, abs=1e-6)
    assert np.allclose(r.A, np.eye(3), atol=1e-8)


def test_exactly_orthogonal_gives_exact_identity():
    r = rectification_from_vps((1, 0), (-1, 1), UNIT)
    assert r.beta == 90.0 and np.array_equal(r.A, np.eye(3))


@given(st.integers(0, 10_000), st.sampled_from([1.0, 0.7, 1.4]))
@settings(max_examples=200, deadline=None)
def test_clockwise_winding_kept(seed, f_scale):
    rng = np.random.default_rng(seed + 1)
    vh, vv, K, R = random_pair(seed, f_scale)
    # a small clockwise square around the principal point lies on the
    # visible side of the horizon for any of these poses
    p = np.array(K.p)
    quad = p + rng.uniform(5, 40) * np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]])
    assert signed_area(quad) > 0
    r = rectification_from_vps(vh, vv, K)
    w = np.c_[quad, np.ones(4)] @ r.H[2]
    assume(np.all(w > 0) or np.all(w < 0))
    assert signed_area(apply_homography_array(r.H, quad)) > 0


@pytest.mark.parametrize("seed", range(20))
def test_metric_round_trip(seed):
    spec = random_spec(seed)
    _, truth = generate(spec)
    r = rectification_from_vps(truth.v_h, truth.v_v, spec.intrinsics)
    rep = evaluate(truth.quad, truth.aspect, r.H)
    assert rep.d_rect < 1e-6
    assert rep.d_ar < 1e-9
