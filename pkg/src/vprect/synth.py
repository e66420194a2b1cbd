"""Synthetic Manhattan scenes with ground truth, plus a brute-force VP oracle.

A planar rectangular object sits on the optical axis at unit depth, rotated
by ``plane_rotation`` (columns: object x axis, object y axis, normal).  Its
in-plane grid lines are projected with the pinhole model, their endpoints are
perturbed with isotropic Gaussian noise, and random outlier chords are added.

Gaussian samples come from the Box-Muller transform applied to uniform draws
of ``numpy.random.Generator(PCG64(seed)).random``, so a scene is fully
determined by its spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .consistency import consistency_values
from .geom import CameraIntrinsics, Point2, Quadrangle, intrinsics_matrix, segment_array
from .rectify import rectification_from_vps

VP_FAR_LIMIT = 1e9


class DegeneratePoseError(ValueError):
    pass


def rotation_from_angles(tilt_x: float, tilt_y: float, roll: float = 0.0) -> np.ndarray:
    """R = Rz(roll) @ Ry(tilt_y) @ Rx(tilt_x), angles in degrees."""
    ax, ay, az = np.radians([tilt_x, tilt_y, roll])
    Rx = np.array([[1, 0, 0], [0, math.cos(ax), -math.sin(ax)], [0, math.sin(ax), math.cos(ax)]])
    Ry = np.array([[math.cos(ay), 0, math.sin(ay)], [0, 1, 0], [-math.sin(ay), 0, math.cos(ay)]])
    Rz = np.array([[math.cos(az), -math.sin(az), 0], [math.sin(az), math.cos(az), 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


@dataclass(frozen=True)
class SceneSpec:
    intrinsics: CameraIntrinsics
    plane_rotation: np.ndarray
    grid: tuple[int, int] = (10, 10)
    sigma: float = 0.0
    outlier_fraction: float = 0.0
    seed: int = 0
    image_size: tuple[int, int] = (640, 480)
    object_width_frac: float = 0.5  # object width over image width when fronto-parallel
    aspect: float = 1.5  # object width / height

    def __post_init__(self):
        R = np.asarray(self.plane_rotation, dtype=float)
        if R.shape != (3, 3) or not np.allclose(R.T @ R, np.eye(3), atol=1e-9) or np.linalg.det(R) < 0:
            raise ValueError("plane_rotation must be a proper rotation matrix")
        object.__setattr__(self, "plane_rotation", R)
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if min(self.grid) < 2:
            raise ValueError("need at least two segments per direction")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1)")
        if self.aspect <= 0 or self.object_width_frac <= 0:
            raise ValueError("object size parameters must be positive")


@dataclass(frozen=True)
class GroundTruth:
    v_h: Point2
    v_v: Point2
    H_true: np.ndarray
    quad: Quadrangle
    aspect: float
    n_outliers: int = field(default=0)


class _Normal:
    """Box-Muller normal deviates over a seeded PCG64 stream."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def __call__(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        u1 = 1.0 - self.rng.random(m)  # in (0, 1]
        u2 = self.rng.random(m)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
        return z[:n]


def true_vanishing_points(intrinsics: CameraIntrinsics, R) -> tuple[Point2, Point2]:
    K = intrinsics_matrix(intrinsics)
    out = []
    for k in range(2):
        h = K @ np.asarray(R)[:, k]
        if abs(h[2]) * VP_FAR_LIMIT <= math.hypot(h[0], h[1]):
            raise DegeneratePoseError("vanishing point at infinity: object direction parallel to the image plane")
        out.append(Point2(float(h[0] / h[2]), float(h[1] / h[2])))
    return out[0], out[1]


def _project(K: np.ndarray, X: np.ndarray) -> np.ndarray:
    h = X @ K.T
    return h[..., :2] / h[..., 2:3]


def generate(spec: SceneSpec) -> tuple[np.ndarray, GroundTruth]:
    """Build a noisy segment set (n, 2, 2) and its ground truth."""
    K = intrinsics_matrix(spec.intrinsics)
    R = spec.plane_rotation
    v_h, v_v = true_vanishing_points(spec.intrinsics, R)
    W, Himg = spec.image_size
    f = spec.intrinsics.f

    w = spec.object_width_frac * W / f
    h = w / spec.aspect
    center = np.array([0.0, 0.0, 1.0])
    ex, ey = R[:, 0], R[:, 1]

    def plane(x, y):
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        return center + x * ex + y * ey

    corners = plane([-w / 2, w / 2, w / 2, -w / 2], [-h / 2, -h / 2, h / 2, h / 2])
    if np.any(corners[:, 2] <= 0):
        raise DegeneratePoseError("object extends behind the camera")
    quad = Quadrangle(tuple(Point2(float(c[0]), float(c[1])) for c in _project(K, corners)))

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    normal = _Normal(rng)
    n_h, n_v = spec.grid

    # horizontal lines at evenly spaced heights (borders included), vertical
    # ones at evenly spaced abscissae.  Both families draw their in-plane
    # lengths from the same law, capped by the shorter object side, so that
    # neither family is systematically shorter than the mean length.
    side = min(w, h)
    ys = np.linspace(-h / 2, h / 2, n_h)
    span = side * (0.3 + 0.7 * rng.random(n_h))
    x0 = -w / 2 + (w - span) * rng.random(n_h)
    hseg = np.stack([plane(x0, ys), plane(x0 + span, ys)], axis=1)

    xs = np.linspace(-w / 2, w / 2, n_v)
    span = side * (0.3 + 0.7 * rng.random(n_v))
    y0 = -h / 2 + (h - span) * rng.random(n_v)
    vseg = np.stack([plane(xs, y0), plane(xs, y0 + span)], axis=1)

    segs = _project(K, np.concatenate([hseg, vseg]))
    if spec.sigma > 0:
        segs = segs + spec.sigma * normal(segs.size).reshape(segs.shape)

    n_out = math.ceil(spec.outlier_fraction * (n_h + n_v))
    if n_out:
        segs = np.concatenate([segs, _outliers(rng, n_out, W, Himg)])

    H_true = rectification_from_vps(v_h, v_v, spec.intrinsics).H
    truth = GroundTruth(v_h=v_h, v_v=v_v, H_true=H_true, quad=quad, aspect=spec.aspect, n_outliers=n_out)
    return segs, truth


def random_spec(
    seed: int,
    sigma: float = 0.0,
    outlier_fraction: float = 0.0,
    tilt_range: tuple[float, float] = (10.0, 40.0),
    roll_range: float = 15.0,
    f: float = 800.0,
    image_size: tuple[int, int] = (640, 480),
    grid: tuple[int, int] = (10, 10),
    **kw,
) -> SceneSpec:
    """Scene with both tilts drawn from ``tilt_range`` (random signs) and a
    roll in +-``roll_range`` degrees, all from ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    lo, hi = tilt_range
    tx, ty = lo + (hi - lo) * rng.random(2)
    sx, sy = np.where(rng.random(2) < 0.5, -1.0, 1.0)
    roll = roll_range * (2.0 * rng.random() - 1.0)
    W, H = image_size
    intr = CameraIntrinsics(f, Point2(W / 2.0, H / 2.0))
    return SceneSpec(
        intr,
        rotation_from_angles(sx * tx, sy * ty, roll),
        grid=grid,
        sigma=sigma,
        outlier_fraction=outlier_fraction,
        seed=seed,
        image_size=image_size,
        **kw,
    )


def _outliers(rng: np.random.Generator, n: int, W: float, H: float) -> np.ndarray:
    diag = math.hypot(W, H)
    out = np.empty((n, 2, 2))
    k = 0
    while k < n:
        p = rng.random(2) * (W, H)
        ang = rng.random() * 2 * np.pi
        ln = diag * (0.05 + 0.25 * rng.random())
        q = p + ln * np.array([math.cos(ang), math.sin(ang)])
        if 0 <= q[0] <= W and 0 <= q[1] <= H:
            out[k] = (p, q)
            k += 1
    return out


def grid_search_vp(S, T_D: float, center, window: float, step: float) -> Point2:
    """Exhaustive minimizer of the robust cost on a square grid.

    The grid spans ``center +- window`` in both axes with spacing ``step``
    and always contains ``center``.  Ties go to the first grid point in
    row-major order.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if window < 0:
        raise ValueError("window must be non-negative")
    segs = segment_array(S)
    k = int(math.floor(window / step + 1e-9))
    offs = np.arange(-k, k + 1) * step
    best, best_pt = np.inf, Point2(float(center[0]), float(center[1]))
    gy, gx = np.meshgrid(center[1] + offs, center[0] + offs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    chunk = max(1, 2_000_000 // max(1, len(segs)))
    for s in range(0, len(pts), chunk):
        block = pts[s : s + chunk]
        cost = np.minimum(consistency_values(block, segs), T_D).sum(axis=1)
        i = int(np.argmin(cost))
        if cost[i] < best:
            best = float(cost[i])
            best_pt = Point2(float(block[i, 0]), float(block[i, 1]))
    return best_pt
