"""Rectification quality of a known quadrangle mapped through a homography.

Given the source quadrangle (corners clockwise from the top-left), the
template aspect ratio ``t`` (width / height) and a homography ``H``:

* ``d_rect``: mean absolute deviation of the four corner angles from 90 deg;
* ``d_rot``: mean absolute tilt of the two mid-lines against the image axes;
* ``d_ar``: relative aspect-ratio error ``|(a + c) / (b + d) - t| / t`` with
  ``a, c`` the top and bottom sides and ``b, d`` the right and left sides.

Rectification is only determined up to a 90 degree rotation, so ``d_rot`` is
also evaluated against swapped axes and the smaller value is kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import EPS_W, Quadrangle


class DegenerateQuadError(ValueError):
    pass


@dataclass(frozen=True)
class EvalReport:
    d_rect: float  # degrees
    d_rot: float  # degrees
    d_ar: float  # fraction, multiply by 100 for percent
    rotated90: bool = False

    def as_dict(self) -> dict:
        return {"d_rect": self.d_rect, "d_rot": self.d_rot, "d_ar": 100.0 * self.d_ar}


def _segments_cross(p, q, r, s) -> bool:
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    return orient(p, q, r) * orient(p, q, s) < 0 and orient(r, s, p) * orient(r, s, q) < 0


def _map_corners(H, Q: Quadrangle) -> np.ndarray:
    pts = Q.as_array()
    q = np.c_[pts, np.ones(4)] @ np.asarray(H, dtype=float).T
    if np.any(np.abs(q[:, 2]) < EPS_W):
        raise DegenerateQuadError("a corner maps to the line at infinity")
    return q[:, :2] / q[:, 2:3]


def corner_angles(P: np.ndarray) -> np.ndarray:
    """Angle at each corner between its two sides, degrees in [0, 180]."""
    prev = np.roll(P, 1, axis=0) - P
    nxt = np.roll(P, -1, axis=0) - P
    crs = prev[:, 0] * nxt[:, 1] - prev[:, 1] * nxt[:, 0]
    dot = np.einsum("ij,ij->i", prev, nxt)
    return np.degrees(np.arctan2(np.abs(crs), dot))


def _line_tilt(d: np.ndarray, axis: int) -> float:
    """Signed angle in (-90, 90] between an undirected line and an image axis."""
    ang = np.degrees(np.arctan2(d[1], d[0])) if axis == 0 else np.degrees(np.arctan2(-d[0], d[1]))
    ang = (ang + 90.0) % 180.0 - 90.0
    return 90.0 if ang == -90.0 else float(ang)


def midline_tilts(P: np.ndarray) -> tuple[float, float, float, float]:
    """Tilts of the two mid-lines.

    Returns (alpha_h, alpha_v, alpha_h90, alpha_v90): the left-right mid-line
    against the x axis, the top-bottom mid-line against the y axis, and the
    same two lines against the swapped axes.
    """
    p0, p1, p2, p3 = P
    horiz = 0.5 * (p1 + p2) - 0.5 * (p3 + p0)
    vert = 0.5 * (p2 + p3) - 0.5 * (p0 + p1)
    return _line_tilt(horiz, 0), _line_tilt(vert, 1), _line_tilt(horiz, 1), _line_tilt(vert, 0)


def evaluate(Q: Quadrangle, t: float, H) -> EvalReport:
    if not t > 0:
        raise ValueError("aspect ratio must be positive")
    src = Q.as_array()
    if _segments_cross(src[0], src[1], src[2], src[3]) or _segments_cross(src[1], src[2], src[3], src[0]):
        raise DegenerateQuadError("source quadrangle is self-intersecting")
    P = _map_corners(H, Q)
    if _segments_cross(P[0], P[1], P[2], P[3]) or _segments_cross(P[1], P[2], P[3], P[0]):
        raise DegenerateQuadError("rectified quadrangle is self-intersecting")

    d_rect = float(np.mean(np.abs(90.0 - corner_angles(P))))

    a_h, a_v, a_h90, a_v90 = midline_tilts(P)
    d_rot = 0.5 * (abs(a_h) + abs(a_v))
    d_rot90 = 0.5 * (abs(a_h90) + abs(a_v90))
    rotated90 = d_rot90 < d_rot

    side = np.hypot(*(np.roll(P, -1, axis=0) - P).T)
    a, b, c, d = side
    if b + d == 0:
        raise DegenerateQuadError("zero-height quadrangle")
    d_ar = abs((a + c) / (b + d) - t) / t
    return EvalReport(d_rect=d_rect, d_rot=min(d_rot, d_rot90), d_ar=float(d_ar), rotated90=bool(rotated90))
