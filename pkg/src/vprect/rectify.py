"""Metric rectification homography from a pair of vanishing points.

The camera is virtually rotated so that the two 3D directions behind the
vanishing points become the new x and y axes.  If the focal length is only
approximate the two directions are not orthogonal; the remaining affine skew
is removed with a shear of known angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .geom import CameraIntrinsics, Point2, intrinsics_inverse, intrinsics_matrix


class FocalSource(str, Enum):
    PROVIDED = "provided"
    ESTIMATED = "estimated"
    DIAGONAL = "diagonal-fallback"


class CollinearVpsError(ValueError):
    pass


class DegenerateRectificationError(ValueError):
    pass


BETA_MIN_DEG = 1.0
BETA_MAX_DEG = 179.0


@dataclass(frozen=True)
class Rectification:
    H: np.ndarray
    R: np.ndarray  # columns: new x, y, z axes in the old camera frame
    A: np.ndarray
    beta: float  # degrees
    f_used: float
    f_source: FocalSource = FocalSource.PROVIDED


def rectification_from_vps(
    v_h, v_v, intrinsics: CameraIntrinsics, f_source: FocalSource = FocalSource.PROVIDED
) -> Rectification:
    K = intrinsics_matrix(intrinsics)
    K_inv = intrinsics_inverse(intrinsics)
    V_h = K_inv @ np.array([v_h[0], v_h[1], 1.0])
    V_v = K_inv @ np.array([v_v[0], v_v[1], 1.0])
    cx = V_h / np.linalg.norm(V_h)
    cy = V_v / np.linalg.norm(V_v)
    cz = np.cross(cx, cy)
    nz = np.linalg.norm(cz)
    if nz < 1e-9:
        raise CollinearVpsError("vanishing points give collinear 3D directions")
    cz = cz / nz
    if abs(cz[2]) < 1e-12:
        raise DegenerateRectificationError("object plane contains the optical axis")
    if cz[2] < 0:
        # otherwise the rectified image comes out mirrored
        cy = -cy
        cz = -cz
    cy2 = np.cross(cz, cx)

    cos_b = float(np.clip(cx @ cy, -1.0, 1.0))
    beta = math.degrees(math.acos(cos_b))
    if abs(cos_b) < 1e-12:
        beta = 90.0
        A = np.eye(3)
    else:
        beta = min(max(beta, BETA_MIN_DEG), BETA_MAX_DEG)
        b = math.radians(beta)
        A = np.array([[1.0, -math.cos(b) / math.sin(b), 0.0], [0.0, 1.0 / math.sin(b), 0.0], [0.0, 0.0, 1.0]])

    R = np.column_stack([cx, cy2, cz])
    H = K @ A @ R.T @ K_inv
    return Rectification(H=H, R=R, A=A, beta=beta, f_used=intrinsics.f, f_source=f_source)


def focal_for_rectification(pair, provided_f: Optional[float], image_size) -> tuple[float, FocalSource]:
    """Focal length to rectify with: provided, else estimated, else the image diagonal."""
    W, H = image_size
    if W <= 0 or H <= 0:
        raise ValueError("image size must be positive")
    if provided_f is not None:
        return float(provided_f), FocalSource.PROVIDED
    if pair is not None and pair.f_estimated is not None:
        return float(pair.f_estimated), FocalSource.ESTIMATED
    return math.hypot(W, H), FocalSource.DIAGONAL


def rectify_pair(pair, image_size, focal: Optional[float] = None, principal=None) -> Rectification:
    W, H = image_size
    p = Point2(*principal) if principal is not None else Point2(W / 2.0, H / 2.0)
    f, src = focal_for_rectification(pair, focal, image_size)
    return rectification_from_vps(pair.e_h, pair.e_v, CameraIntrinsics(f, p), f_source=src)
