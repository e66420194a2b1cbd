"""Planar and homogeneous-coordinate primitives.

Image coordinates follow the usual raster convention: origin at the top-left
corner, x to the right, y downwards.  Everything is double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

EPS_PARALLEL = 1e-12
EPS_W = 1e-12


class GeometryError(ValueError):
    """Base class for geometric degeneracies."""


class DegenerateSegmentError(GeometryError):
    pass


class ParallelLinesError(GeometryError):
    pass


class PointAtInfinityError(GeometryError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Segment:
    """A line segment given by two distinct endpoints."""

    p1: Point2
    p2: Point2

    def __post_init__(self):
        p1 = Point2(float(self.p1[0]), float(self.p1[1]))
        p2 = Point2(float(self.p2[0]), float(self.p2[1]))
        if not all(math.isfinite(c) for c in (*p1, *p2)):
            raise DegenerateSegmentError("segment endpoints must be finite")
        if p1 == p2:
            raise DegenerateSegmentError(f"zero-length segment at {tuple(p1)}")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)

    @classmethod
    def from_coords(cls, x1, y1, x2, y2) -> "Segment":
        return cls(Point2(x1, y1), Point2(x2, y2))

    @property
    def length(self) -> float:
        return length(self)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Ideal pinhole camera with square pixels.

    Attributes:
        f: focal length in pixels.
        p: principal point in pixels.
    """

    f: float
    p: Point2

    def __post_init__(self):
        if not (self.f > 0 and math.isfinite(self.f)):
            raise ValueError(f"focal length must be positive, got {self.f}")
        object.__setattr__(self, "p", Point2(float(self.p[0]), float(self.p[1])))

    @property
    def K(self) -> np.ndarray:
        return intrinsics_matrix(self)

    @property
    def K_inv(self) -> np.ndarray:
        return intrinsics_inverse(self)


@dataclass(frozen=True)
class Quadrangle:
    """Four corners ordered clockwise (in image coordinates) from the top-left."""

    corners: tuple[Point2, Point2, Point2, Point2]

    def __post_init__(self):
        pts = tuple(Point2(float(c[0]), float(c[1])) for c in self.corners)
        if len(pts) != 4:
            raise ValueError("a quadrangle needs exactly four corners")
        object.__setattr__(self, "corners", pts)

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> "Quadrangle":
        if len(values) != 8:
            raise ValueError("expected 8 numbers x0,y0,...,x3,y3")
        return cls(tuple(Point2(values[2 * i], values[2 * i + 1]) for i in range(4)))

    def as_array(self) -> np.ndarray:
        return np.array(self.corners, dtype=float)


def length(s: Segment) -> float:
    return math.hypot(s.p2.x - s.p1.x, s.p2.y - s.p1.y)


def line_intersection(s1: Segment, s2: Segment) -> Point2:
    """Intersect the infinite carrier lines of two segments.

    Nearly parallel lines are *not* rejected; they legitimately meet far away.
    Raises ParallelLinesError only when the unit directions are parallel to
    within EPS_PARALLEL.
    """
    d1x, d1y = s1.p2.x - s1.p1.x, s1.p2.y - s1.p1.y
    d2x, d2y = s2.p2.x - s2.p1.x, s2.p2.y - s2.p1.y
    cross = d1x * d2y - d1y * d2x
    if abs(cross) < EPS_PARALLEL * math.hypot(d1x, d1y) * math.hypot(d2x, d2y):
        raise ParallelLinesError("carrier lines are parallel")
    # cross product of homogeneous lines about a local origin; the origin is a
    # commutative sum so swapping the arguments is bit-identical
    ox = ((s1.p1.x + s1.p2.x) + (s2.p1.x + s2.p2.x)) / 4.0
    oy = ((s1.p1.y + s1.p2.y) + (s2.p1.y + s2.p2.y)) / 4.0
    c1 = (s1.p1.x - ox) * (s1.p2.y - oy) - (s1.p1.y - oy) * (s1.p2.x - ox)
    c2 = (s2.p1.x - ox) * (s2.p2.y - oy) - (s2.p1.y - oy) * (s2.p2.x - ox)
    x = (c2 * d1x - c1 * d2x) / cross
    y = (c2 * d1y - c1 * d2y) / cross
    return Point2(x + ox, y + oy)


def intrinsics_matrix(c: CameraIntrinsics) -> np.ndarray:
    return np.array([[c.f, 0.0, c.p.x], [0.0, c.f, c.p.y], [0.0, 0.0, 1.0]])


def intrinsics_inverse(c: CameraIntrinsics) -> np.ndarray:
    return np.array(
        [[1.0 / c.f, 0.0, -c.p.x / c.f], [0.0, 1.0 / c.f, -c.p.y / c.f], [0.0, 0.0, 1.0]]
    )


def apply_homography(H, p) -> Point2:
    H = np.asarray(H, dtype=float)
    q = H @ np.array([p[0], p[1], 1.0])
    if abs(q[2]) < EPS_W:
        raise PointAtInfinityError(f"{tuple(p)} maps to the line at infinity")
    return Point2(q[0] / q[2], q[1] / q[2])


def apply_homography_array(H, pts) -> np.ndarray:
    """Map an (n, 2) array of points; raises if any lands at infinity."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    q = pts @ np.asarray(H, dtype=float)[:, :2].T + np.asarray(H, dtype=float)[:, 2]
    if np.any(np.abs(q[:, 2]) < EPS_W):
        raise PointAtInfinityError("a point maps to the line at infinity")
    return q[:, :2] / q[:, 2:3]


def segment_array(segments: Iterable) -> np.ndarray:
    """Coerce a segment list into an (n, 2, 2) float array.

    Accepts Segment objects, ((x1, y1), (x2, y2)) pairs, flat (x1, y1, x2, y2)
    rows, or an array already shaped (n, 2, 2) / (n, 4).
    """
    if isinstance(segments, np.ndarray):
        arr = np.asarray(segments, dtype=float)
    else:
        rows = []
        for s in segments:
            if isinstance(s, Segment):
                rows.append((s.p1.x, s.p1.y, s.p2.x, s.p2.y))
            else:
                rows.append(np.asarray(s, dtype=float).reshape(4))
        arr = np.array(rows, dtype=float).reshape(-1, 4)
    return arr.reshape(-1, 2, 2)


def segment_lengths(segs: np.ndarray) -> np.ndarray:
    d = segs[:, 1] - segs[:, 0]
    return np.hypot(d[:, 0], d[:, 1])


def signed_area(pts: np.ndarray) -> float:
    """Shoelace area; positive for clockwise winding in y-down image coordinates."""
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
