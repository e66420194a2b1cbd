"""Vanishing-point detection and metric rectification of planar Manhattan objects."""

from .consistency import (
    DegenerateEigenvalueError,
    ScatterMatrix,
    consistency,
    consistency_gradient,
    InlierCost,
    consistency_values,
    lambda_min,
    robust_cost,
    robust_cost_and_grad,
    scatter,
)
from .geom import (
    CameraIntrinsics,
    DegenerateSegmentError,
    ParallelLinesError,
    Point2,
    PointAtInfinityError,
    Quadrangle,
    Segment,
    apply_homography,
    intrinsics_inverse,
    intrinsics_matrix,
    length,
    line_intersection,
)
from .metrics import DegenerateQuadError, EvalReport, evaluate
from .optimize import OptimizerConfig, minimize
from .rectify import (
    CollinearVpsError,
    DegenerateRectificationError,
    FocalSource,
    Rectification,
    focal_for_rectification,
    rectification_from_vps,
    rectify_pair,
)
from .synth import (
    DegeneratePoseError,
    GroundTruth,
    SceneSpec,
    generate,
    grid_search_vp,
    random_spec,
    rotation_from_angles,
)
from .vp_detect import (
    AcuteAngleError,
    DetectConfig,
    NoPairError,
    VpCandidate,
    VpPair,
    dedup,
    detect,
    estimate_focal,
    filter_near_principal,
    inlier_set,
    refine_candidates,
    rough_candidates,
    select_pair,
)

__version__ = "0.1.0"
