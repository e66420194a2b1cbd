"""Consistency between a vanishing-point hypothesis and a noisy segment.

For a point ``v`` and a segment with endpoints ``x1, x2`` the consistency is
the smallest possible sum of squared distances from the two endpoints to a
line through ``v``.  It equals the smallest eigenvalue of the endpoint
scatter matrix about ``v``::

    M(v) = sum_j (x_j - v)(x_j - v)^T

The robust cost caps every segment's contribution at a threshold ``T_D`` so
that outlying segments stop pulling on the estimate.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _kernels
from .geom import Segment, segment_array

EIG_REL_EPS = _kernels.EIG_REL_EPS


class DegenerateEigenvalueError(ArithmeticError):
    """Scatter matrix is (numerically) isotropic; the minor axis is undefined."""


class ScatterMatrix(NamedTuple):
    """Symmetric 2x2 matrix [[a, b], [b, c]]."""

    a: float
    b: float
    c: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]])


def scatter(v, s: Segment) -> ScatterMatrix:
    d1x, d1y = s.p1.x - v[0], s.p1.y - v[1]
    d2x, d2y = s.p2.x - v[0], s.p2.y - v[1]
    return ScatterMatrix(
        d1x * d1x + d2x * d2x,
        d1x * d1y + d2x * d2y,
        d1y * d1y + d2y * d2y,
    )


def lambda_min(M: ScatterMatrix) -> float:
    a, b, c = M
    half_tr = 0.5 * (a + c)
    lam = half_tr - math.hypot(0.5 * (a - c), b)
    return max(lam, 0.0)


def consistency_values(points, segs) -> np.ndarray:
    """Consistency of every point against every segment.

    ``points`` is (2,) or (m, 2); ``segs`` is (n, 2, 2).  Returns (n,) or
    (m, n).  Computed as det(M) / lambda_max with
    det(M) = cross(x1 - v, x2 - x1)^2, which avoids the cancellation of the
    textbook closed form when ``v`` is far from the segment.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.ascontiguousarray(pts.reshape(-1, 2))
    segs = np.ascontiguousarray(segs, dtype=float).reshape(-1, 2, 2)
    out = _kernels.lam_matrix(pts, segs)
    return out[0] if single else out


def inlier_masks(points, segs, T_D: float) -> np.ndarray:
    """(m, n) boolean matrix of consistency <= T_D."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 2))
    segs = np.ascontiguousarray(segs, dtype=float).reshape(-1, 2, 2)
    return _kernels.inlier_mask(pts, segs, float(T_D))


def consistency(v, s: Segment) -> float:
    segs = np.array([[s.p1, s.p2]], dtype=float)
    return float(consistency_values(v, segs)[0])


def robust_cost(v, S, T_D: float) -> float:
    segs = segment_array(S)
    if len(segs) == 0:
        raise ValueError("segment list must be non-empty")
    if not T_D > 0:
        raise ValueError("T_D must be positive")
    return float(np.minimum(consistency_values(v, segs), T_D).sum())


def consistency_gradient(v, s: Segment) -> tuple[float, float]:
    """Gradient of the consistency with respect to the point ``v``.

    Raises DegenerateEigenvalueError when the eigengap of the scatter matrix
    is below EIG_REL_EPS * trace.
    """
    a, b, c = scatter(v, s)
    tr = a + c
    gap = 2.0 * math.hypot(0.5 * (a - c), b)
    if gap <= EIG_REL_EPS * tr:
        raise DegenerateEigenvalueError("scatter matrix has equal eigenvalues")
    theta = 0.5 * math.atan2(2.0 * b, a - c)
    ux, uy = -math.sin(theta), math.cos(theta)
    r1 = ux * (s.p1.x - v[0]) + uy * (s.p1.y - v[1])
    r2 = ux * (s.p2.x - v[0]) + uy * (s.p2.y - v[1])
    k = -2.0 * (r1 + r2)
    return (k * ux, k * uy)


class InlierCost:
    """Robust cost of many candidate points, each over its own segment subset.

    ``masks[k]`` selects the segments that enter candidate ``k``'s cost.
    Calling ``cost(idx, X)`` evaluates candidates ``idx`` at points ``X``
    (shape (len(idx), 2)) and returns the costs and gradients.  Segments
    whose consistency reaches ``T_D`` add ``T_D`` and no gradient.
    """

    def __init__(self, segs: np.ndarray, masks: np.ndarray, T_D: float):
        segs = np.asarray(segs, dtype=float)
        masks = np.asarray(masks, dtype=bool).reshape(-1, len(segs))
        _, seg = np.nonzero(masks)  # row-major: entries grouped by candidate
        self.m = len(masks)
        self.T_D = float(T_D)
        self.count = masks.sum(axis=1).astype(np.int64)
        self.start = np.concatenate([[0], np.cumsum(self.count)[:-1]]).astype(np.int64)
        self.segs = np.ascontiguousarray(segs[seg])

    def __call__(self, idx, X) -> tuple[np.ndarray, np.ndarray]:
        idx = np.ascontiguousarray(idx, dtype=np.int64)
        X = np.ascontiguousarray(X, dtype=float).reshape(-1, 2)
        return _kernels.ragged_cost(idx, X, self.start, self.count, self.segs, self.T_D)


def robust_cost_and_grad(v, segs: np.ndarray, T_D: float) -> tuple[float, np.ndarray]:
    """Robust cost of one point and its gradient; capped segments add no gradient."""
    segs = np.asarray(segs, dtype=float)
    F, G = InlierCost(segs, np.ones((1, len(segs)), dtype=bool), T_D)([0], np.asarray(v, dtype=float))
    return float(F[0]), G[0]
