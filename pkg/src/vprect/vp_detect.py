"""Detection of a pair of orthogonal vanishing points from line segments.

Pipeline:

1. rough candidates: intersections of carrier lines of long segments;
2. inlier sets: segments whose consistency with the candidate is <= T_D;
3. sort by inlier count and drop candidates whose inlier sets differ from an
   earlier survivor by less than T_s pixels of segment length;
4. refine each survivor by minimizing the robust cost over its inliers,
   recompute inliers and deduplicate again;
5. drop candidates too close to the principal point;
6. among all pairs whose angle at the principal point lies inside
   (90 - T_alpha1, T_alpha2) degrees, pick the one whose inliers cover the
   largest total segment length.

The public step functions operate on ``VpCandidate`` lists.  ``detect`` runs
the same steps on boolean inlier masks, which is much faster for a few
thousand rough candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .consistency import InlierCost, consistency_values, inlier_masks
from .geom import EPS_PARALLEL, CameraIntrinsics, Point2, segment_array, segment_lengths
from .optimize import OptimizerConfig


class NoPairError(RuntimeError):
    """No pair of vanishing points survived the detection gates."""

    def __init__(self, gate: str, detail: str = ""):
        self.gate = gate
        super().__init__(f"no vanishing-point pair: {gate}" + (f" ({detail})" if detail else ""))


class AcuteAngleError(ValueError):
    """Vanishing points subtend an angle <= 90 degrees at the principal point."""


@dataclass(frozen=True)
class DetectConfig:
    T_L_factor: float = 1.0
    T_D: float = 4.0
    T_s: Optional[float] = None  # None -> 5% of the total segment length
    T_d_factor: float = 0.2
    T_alpha1: float = 5.0
    T_alpha2: float = 170.0
    max_rough_candidates: int = 2000
    strict_length_gate: bool = False  # True -> length > T_L instead of >=
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        for name in ("T_L_factor", "T_d_factor", "T_alpha1", "T_alpha2", "max_rough_candidates"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.T_D < 0:
            raise ValueError("T_D must be non-negative")
        if self.T_s is not None and not self.T_s > 0:
            raise ValueError("T_s must be positive")
        if not self.T_alpha1 < 90.0:
            raise ValueError("T_alpha1 must be below 90 degrees")
        if not 90.0 < self.T_alpha2 <= 180.0:
            raise ValueError("T_alpha2 must lie in (90, 180]")

    def resolve_T_s(self, lengths: np.ndarray) -> float:
        return self.T_s if self.T_s is not None else 0.05 * float(lengths.sum())


@dataclass(frozen=True)
class VpCandidate:
    v: Point2
    inliers: frozenset
    inlier_length_sum: float


@dataclass(frozen=True)
class VpPair:
    e_h: Point2
    e_v: Point2
    f_estimated: Optional[float]
    inliers_h: frozenset
    inliers_v: frozenset


# ---------------------------------------------------------------------------
# array-level helpers shared by the step functions and detect()


def _length_gate(lengths: np.ndarray, cfg: DetectConfig) -> np.ndarray:
    T_L = cfg.T_L_factor * lengths.mean()
    return lengths > T_L if cfg.strict_length_gate else lengths >= T_L


def _rough_points(segs: np.ndarray, lengths: np.ndarray, cfg: DetectConfig) -> np.ndarray:
    long_idx = np.flatnonzero(_length_gate(lengths, cfg))
    if long_idx.size > cfg.max_rough_candidates + 1:
        # the top-N pair products only involve the N+1 longest segments
        order = np.argsort(-lengths[long_idx], kind="stable")
        long_idx = np.sort(long_idx[order[: cfg.max_rough_candidates + 1]])
    if long_idx.size < 2:
        return np.empty((0, 2))
    ii, jj = np.triu_indices(long_idx.size, k=1)
    i, j = long_idx[ii], long_idx[jj]
    a, b = segs[i], segs[j]
    d1 = a[:, 1] - a[:, 0]
    d2 = b[:, 1] - b[:, 0]
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    ok = np.abs(cross) >= EPS_PARALLEL * lengths[i] * lengths[j]
    a, b, d1, d2, cross = a[ok], b[ok], d1[ok], d2[ok], cross[ok]
    prod = lengths[i[ok]] * lengths[j[ok]]
    o = ((a[:, 0] + a[:, 1]) + (b[:, 0] + b[:, 1])) / 4.0
    pa, qa = a[:, 0] - o, a[:, 1] - o
    pb, qb = b[:, 0] - o, b[:, 1] - o
    c1 = pa[:, 0] * qa[:, 1] - pa[:, 1] * qa[:, 0]
    c2 = pb[:, 0] * qb[:, 1] - pb[:, 1] * qb[:, 0]
    pts = (c2[:, None] * d1 - c1[:, None] * d2) / cross[:, None] + o
    order = np.argsort(-prod, kind="stable")[: cfg.max_rough_candidates]
    return pts[order]


def _inlier_masks(points: np.ndarray, segs: np.ndarray, T_D: float) -> np.ndarray:
    if len(points) == 0:
        return np.zeros((0, len(segs)), dtype=bool)
    return inlier_masks(points, segs, T_D)


def _dedup_order(masks: np.ndarray, lengths: np.ndarray, T_s: float) -> list[int]:
    """Indices of surviving candidates, sorted best first."""
    m = len(masks)
    if m == 0:
        return []
    counts = masks.sum(axis=1)
    lsum = masks.astype(float) @ lengths
    order = np.lexsort((np.arange(m), -lsum, -counts))
    keep = _kernels.dedup_order(np.ascontiguousarray(masks), np.ascontiguousarray(lengths, dtype=float), order, float(T_s))
    return keep.tolist()


def _refine_points(points: np.ndarray, masks: np.ndarray, segs: np.ndarray, cfg: DetectConfig) -> np.ndarray:
    """Minimize every candidate's robust cost over its own inliers.

    Candidates with fewer than two inliers have a flat cost and stay put.
    """
    out = np.array(points, dtype=float).reshape(-1, 2)
    rows = np.flatnonzero(masks.sum(axis=1) >= 2)
    if rows.size:
        cost = InlierCost(segs, masks[rows], cfg.T_D)
        o = cfg.optimizer
        out[rows] = _kernels.cg_refine(
            np.ascontiguousarray(out[rows]), cost.start, cost.count, cost.segs, cost.T_D,
            o.max_iters, o.grad_tol or 0.0, o.step_tol, o.f_tol, o.ls_shrink, o.ls_max, o.armijo,
        )
    return out


def _to_candidates(points: np.ndarray, masks: np.ndarray, lengths: np.ndarray) -> list[VpCandidate]:
    out = []
    for v, m in zip(points, masks):
        idx = np.flatnonzero(m)
        out.append(VpCandidate(Point2(float(v[0]), float(v[1])), frozenset(idx.tolist()), float(lengths[idx].sum())))
    return out


def _candidate_arrays(cands: Sequence[VpCandidate], n: int) -> tuple[np.ndarray, np.ndarray]:
    pts = np.array([c.v for c in cands], dtype=float).reshape(-1, 2)
    masks = np.zeros((len(cands), n), dtype=bool)
    for k, c in enumerate(cands):
        if c.inliers:
            masks[k, list(c.inliers)] = True
    return pts, masks


def _pair_angles(points: np.ndarray, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angle (degrees) at ``p`` for every unordered pair i < j."""
    r = points - np.asarray(p, dtype=float)
    ii, jj = np.triu_indices(len(points), k=1)
    dot = np.einsum("ij,ij->i", r[ii], r[jj])
    crs = r[ii, 0] * r[jj, 1] - r[ii, 1] * r[jj, 0]
    return ii, jj, np.degrees(np.arctan2(np.abs(crs), dot))


def _horizontalness(segs: np.ndarray, mask: np.ndarray) -> float:
    d = segs[mask, 1] - segs[mask, 0]
    if len(d) == 0:
        return 0.0
    return float(np.abs(d[:, 0]).sum() / np.hypot(d[:, 0], d[:, 1]).sum())


# ---------------------------------------------------------------------------
# public steps


def rough_candidates(S, cfg: DetectConfig | None = None) -> list[VpCandidate]:
    """Pairwise carrier-line intersections of the long segments.

    The candidates come back ordered by decreasing product of the two segment
    lengths, with inlier sets already evaluated at ``cfg.T_D``.
    """
    cfg = cfg or DetectConfig()
    segs = segment_array(S)
    if len(segs) < 2:
        return []
    lengths = segment_lengths(segs)
    pts = _rough_points(segs, lengths, cfg)
    return _to_candidates(pts, _inlier_masks(pts, segs, cfg.T_D), lengths)


def inlier_set(v, S, T_D: float) -> frozenset:
    segs = segment_array(S)
    return frozenset(np.flatnonzero(consistency_values(v, segs) <= T_D).tolist())


def dedup(cands: Sequence[VpCandidate], S, T_s: float) -> list[VpCandidate]:
    segs = segment_array(S)
    lengths = segment_lengths(segs)
    _, masks = _candidate_arrays(cands, len(segs))
    return [cands[i] for i in _dedup_order(masks, lengths, T_s)]


def refine_candidates(E: Sequence[VpCandidate], S, cfg: DetectConfig | None = None) -> list[VpCandidate]:
    """Refine rough candidates, recompute their inliers and deduplicate."""
    cfg = cfg or DetectConfig()
    segs = segment_array(S)
    lengths = segment_lengths(segs)
    pts, masks = _candidate_arrays(E, len(segs))
    refined = _refine_points(pts, masks, segs, cfg)
    new_masks = _inlier_masks(refined, segs, cfg.T_D)
    keep = _dedup_order(new_masks, lengths, cfg.resolve_T_s(lengths))
    return _to_candidates(refined[keep], new_masks[keep], lengths)


def filter_near_principal(E: Sequence[VpCandidate], p, diag: float, cfg: DetectConfig | None = None) -> list[VpCandidate]:
    cfg = cfg or DetectConfig()
    T_d = cfg.T_d_factor * diag
    return [c for c in E if math.hypot(c.v[0] - p[0], c.v[1] - p[1]) >= T_d]


def _choose_pair(points: np.ndarray, masks: np.ndarray, lengths: np.ndarray, p, cfg: DetectConfig) -> tuple[int, int]:
    if len(points) < 2:
        raise NoPairError("fewer than two candidates", f"{len(points)} left after principal-point gate")
    ii, jj, alpha = _pair_angles(points, p)
    ok = (alpha > 90.0 - cfg.T_alpha1) & (alpha < cfg.T_alpha2)
    if not np.any(ok):
        raise NoPairError("angle gate", f"none of {len(ii)} pairs within ({90 - cfg.T_alpha1:g}, {cfg.T_alpha2:g}) degrees")
    ii, jj = ii[ok], jj[ok]
    score = (masks[ii] | masks[jj]).astype(float) @ lengths
    best = int(np.argmax(score))
    return int(ii[best]), int(jj[best])


def select_pair(E: Sequence[VpCandidate], p, S, cfg: DetectConfig | None = None) -> VpPair:
    """Pick the admissible pair with the largest union of inlier lengths.

    Of the two, e_h is the one whose inlier segments are closer to horizontal.
    """
    cfg = cfg or DetectConfig()
    segs = segment_array(S)
    lengths = segment_lengths(segs)
    pts, masks = _candidate_arrays(E, len(segs))
    i, j = _choose_pair(pts, masks, lengths, p, cfg)
    if _horizontalness(segs, masks[j]) > _horizontalness(segs, masks[i]):
        i, j = j, i
    a, b = E[i], E[j]
    return VpPair(a.v, b.v, None, a.inliers, b.inliers)


def estimate_focal(v1, v2, p) -> float:
    dot = (v1[0] - p[0]) * (v2[0] - p[0]) + (v1[1] - p[1]) * (v2[1] - p[1])
    if dot >= 0.0:
        raise AcuteAngleError("angle at the principal point is not obtuse; focal length undefined")
    return math.sqrt(-dot)


def detect(
    S,
    image_size,
    intrinsics: CameraIntrinsics | None = None,
    cfg: DetectConfig | None = None,
    principal=None,
) -> VpPair:
    """Detect the dominant pair of orthogonal vanishing points.

    Args:
        S: segments, anything accepted by ``geom.segment_array``.
        image_size: (width, height) in pixels.
        intrinsics: camera intrinsics; only the principal point is used here.
            When absent the focal length is estimated from the detected pair
            when possible.
        cfg: detection thresholds.
        principal: principal point used when ``intrinsics`` is absent;
            defaults to the image center.

    Raises:
        NoPairError: naming the gate that eliminated every pair.
    """
    cfg = cfg or DetectConfig()
    segs = segment_array(S)
    if len(segs) < 4:
        raise NoPairError("too few segments", f"need at least 4, got {len(segs)}")
    W, H = image_size
    if intrinsics is not None:
        p = intrinsics.p
    elif principal is not None:
        p = Point2(float(principal[0]), float(principal[1]))
    else:
        p = Point2(W / 2.0, H / 2.0)
    diag = math.hypot(W, H)
    lengths = segment_lengths(segs)
    T_s = cfg.resolve_T_s(lengths)

    pts = _rough_points(segs, lengths, cfg)
    if len(pts) == 0:
        raise NoPairError("no rough candidates", "no non-parallel pair of long segments")
    masks = _inlier_masks(pts, segs, cfg.T_D)
    keep = _dedup_order(masks, lengths, T_s)
    pts, masks = pts[keep], masks[keep]

    refined = _refine_points(pts, masks, segs, cfg)
    masks = _inlier_masks(refined, segs, cfg.T_D)
    keep = _dedup_order(masks, lengths, T_s)
    refined, masks = refined[keep], masks[keep]

    near = np.hypot(refined[:, 0] - p[0], refined[:, 1] - p[1]) < cfg.T_d_factor * diag
    refined, masks = refined[~near], masks[~near]

    i, j = _choose_pair(refined, masks, lengths, p, cfg)
    if _horizontalness(segs, masks[j]) > _horizontalness(segs, masks[i]):
        i, j = j, i
    e_h = Point2(float(refined[i, 0]), float(refined[i, 1]))
    e_v = Point2(float(refined[j, 0]), float(refined[j, 1]))

    f_est = None
    if intrinsics is None:
        try:
            f_est = estimate_focal(e_h, e_v, p)
        except AcuteAngleError:
            pass
    return VpPair(
        e_h,
        e_v,
        f_est,
        frozenset(np.flatnonzero(masks[i]).tolist()),
        frozenset(np.flatnonzero(masks[j]).tolist()),
    )
