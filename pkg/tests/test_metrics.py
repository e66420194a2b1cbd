import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from vprect.geom import Quadrangle
from vprect.metrics import DegenerateQuadError, EvalReport, corner_angles, evaluate

RECT = Quadrangle.from_flat([0, 0, 2, 0, 2, 1, 0, 1])


def about(H, c):
    T = np.array([[1, 0, c[0]], [0, 1, c[1]], [0, 0, 1.0]])
    Ti = np.array([[1, 0, -c[0]], [0, 1, -c[1]], [0, 0, 1.0]])
    return T @ H @ Ti


def rot3(deg):
    a = math.radians(deg)
    return np.array([[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1.0]])


def similarity(deg, s, tx, ty):
    S = rot3(deg)
    S[:2, :2] *= s
    S[:2, 2] = (tx, ty)
    return S


def test_identity_on_rectangle():
    r = evaluate(RECT, 2.0, np.eye(3))
    assert (r.d_rect, r.d_rot, r.d_ar) == (0.0, 0.0, 0.0)
    assert r.as_dict() == {"d_rect": 0.0, "d_rot": 0.0, "d_ar": 0.0}


def test_three_degree_rotation():
    r = evaluate(RECT, 2.0, about(rot3(3.0), (1.0, 0.5)))
    assert r.d_rect == pytest.approx(0.0, abs=1e-12)
    assert r.d_rot == pytest.approx(3.0, abs=1e-12)
    assert r.d_ar == pytest.approx(0.0, abs=1e-12)


def test_horizontal_stretch():
    r = evaluate(RECT, 2.0, np.diag([1.1, 1.0, 1.0]))
    assert r.d_rect == 0.0
    assert r.d_ar == pytest.approx(0.1, rel=1e-12)
    assert r.as_dict()["d_ar"] == pytest.approx(10.0, rel=1e-12)


def test_skew_changes_angles():
    H = np.array([[1, 0.2, 0], [0, 1, 0], [0, 0, 1.0]])
    r = evaluate(RECT, 2.0, H)
    # two corners at 90 +- atan(0.2), mean deviation is that angle
    assert r.d_rect == pytest.approx(math.degrees(math.atan(0.2)), rel=1e-12)


def test_corner_angles_of_square():
    P = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert np.allclose(corner_angles(P), 90.0)


def test_ninety_degree_rotation_compensated():
    base = evaluate(RECT, 2.0, about(rot3(2.0), (1.0, 0.5)))
    turned = evaluate(RECT, 2.0, rot3(90.0) @ about(rot3(2.0), (1.0, 0.5)))
    assert turned.rotated90 and not base.rotated90
    assert turned.d_rect == pytest.approx(base.d_rect, abs=1e-9)
    assert turned.d_rot == pytest.approx(base.d_rot, abs=1e-9)
    assert turned.d_ar == pytest.approx(base.d_ar, abs=1e-12)


@given(
    st.floats(-30, 30), st.floats(0.1, 10), st.floats(-100, 100), st.floats(-100, 100),
    st.lists(st.floats(-0.3, 0.3), min_size=8, max_size=8),
)
@settings(max_examples=200, deadline=None)
def test_similarity_invariance(deg, s, tx, ty, jitter):
    Q = Quadrangle.from_flat(np.array([0, 0, 2, 0, 2, 1, 0, 1]) + np.array(jitter))
    H = np.array([[1, 0.05, 0], [0.02, 1, 0], [1e-3, 2e-3, 1.0]])
    try:
        base = evaluate(Q, 2.0, H)
    except DegenerateQuadError:
        assume(False)
    moved = evaluate(Q, 2.0, similarity(deg, s, tx, ty) @ H)
    assert moved.d_rect == pytest.approx(base.d_rect, abs=1e-9)
    assert moved.d_ar == pytest.approx(base.d_ar, rel=1e-9, abs=1e-12)


@given(st.floats(1e-3, 1e3))
def test_uniform_scale_keeps_aspect(s):
    H = np.diag([1.3, 1.0, 1.0])
    a = evaluate(RECT, 2.0, H)
    b = evaluate(RECT, 2.0, np.diag([s, s, 1.0]) @ H)
    assert b.d_ar == pytest.approx(a.d_ar, rel=1e-12)


def test_self_intersecting_rejected():
    bow = Quadrangle.from_flat([0, 0, 2, 1, 2, 0, 0, 1])
    with pytest.raises(DegenerateQuadError):
        evaluate(bow, 2.0, np.eye(3))


def test_corner_at_infinity_rejected():
    H = np.array([[1, 0, 0], [0, 1, 0], [1, 0, -2.0]])  # maps x = 2 to infinity
    with pytest.raises(DegenerateQuadError):
        evaluate(RECT, 2.0, H)


def test_bad_aspect():
    with pytest.raises(ValueError):
        evaluate(RECT, 0.0, np.eye(3))


def test_report_bounds(rng):
    for _ in range(200):
        H = np.eye(3) + 0.2 * rng.standard_normal((3, 3)) * [[1, 1, 1], [1, 1, 1], [0.01, 0.01, 0]]
        try:
            r = evaluate(RECT, 2.0, H)
        except DegenerateQuadError:
            continue
        assert isinstance(r, EvalReport)
        assert 0 <= r.d_rect <= 90 and r.d_rot >= 0 and r.d_ar >= 0
