"""Depth-based refinement of scale-ambiguous RGB pose estimates.

An RGB-only pose estimator trained on a fixed-size reference model cannot
tell a small near object from a large far one. This package slides the
model along the camera ray while rescaling it to keep the image fixed,
optimizes the single slide parameter so a rendered depth map matches the
measured one, and reports the corrected position plus the true object
dimensions. It also samples pre-grasp poses around the corrected position
and ships a synthetic evaluation harness plus a command-line interface.
"""

from .errors import (
    EXIT_DEGENERATE_SCENE,
    EXIT_INVALID_INPUT,
    EXIT_NO_CANDIDATE,
    EXIT_NO_OVERLAP,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_UNEXPECTED,
    BehindCameraError,
    ConfigError,
    DegenerateRayError,
    DegenerateSceneError,
    DepthMapFormatError,
    DepthRefineError,
    EmptyGeometryError,
    InvalidInputError,
    MeshParseError,
    NoFeasibleCandidateError,
    NoOverlapError,
    NumericalError,
    exit_code_for,
)
from .fileio import load_depth, load_mesh, load_scene_config, store_depth, store_mesh
from .geometry import (
    UNIT_NORM_TOL,
    CameraIntrinsics,
    CuboidDims,
    Pose,
    SigmaTransform,
    UnitQuaternion,
    apply_sigma_to_pose,
    as_vec3,
    inverse_transform_point,
    project,
    quat_mul,
    quat_to_matrix,
    quat_x,
    quat_y,
    quat_z,
    rotate,
    scale_factor,
    sigma_translate,
    transform_point,
)
from .grasp import (
    GraspCandidate,
    GraspSamplingConfig,
    candidate_orientation,
    candidate_position,
    sample_candidates,
)
from .harness import (
    CAD_CUBOID,
    DEFAULT_INTRINSICS,
    DEFAULT_SCALE_LEVELS,
    EvalRecord,
    OccluderSpec,
    SceneSpec,
    builtin_model,
    centroid_error,
    cuboid_mesh,
    default_sweep,
    dimensional_error,
    ellipsoid_mesh,
    generate_scene,
    leftmost_region,
    run_sweep,
    simulate_rgb_estimate,
    summary_table,
    tabletop_scene,
)
from .refiner import (
    RansacConfig,
    RefineConfig,
    RefinementResult,
    ResidualSample,
    objective,
    ransac_inliers,
    refine,
    residual_samples,
)
from .renderer import DepthMap, TriangleMesh, pixel_support, render_depth

__version__ = "0.1.0"

__all__ = [
    "BehindCameraError",
    "CAD_CUBOID",
    "CameraIntrinsics",
    "ConfigError",
    "CuboidDims",
    "DEFAULT_INTRINSICS",
    "DEFAULT_SCALE_LEVELS",
    "DegenerateRayError",
    "DegenerateSceneError",
    "DepthMap",
    "DepthMapFormatError",
    "DepthRefineError",
    "EXIT_DEGENERATE_SCENE",
    "EXIT_INVALID_INPUT",
    "EXIT_NO_CANDIDATE",
    "EXIT_NO_OVERLAP",
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "EXIT_UNEXPECTED",
    "EmptyGeometryError",
    "EvalRecord",
    "GraspCandidate",
    "GraspSamplingConfig",
    "InvalidInputError",
    "MeshParseError",
    "NoFeasibleCandidateError",
    "NoOverlapError",
    "NumericalError",
    "OccluderSpec",
    "Pose",
    "RansacConfig",
    "RefineConfig",
    "RefinementResult",
    "ResidualSample",
    "SceneSpec",
    "SigmaTransform",
    "TriangleMesh",
    "UNIT_NORM_TOL",
    "UnitQuaternion",
    "apply_sigma_to_pose",
    "as_vec3",
    "builtin_model",
    "candidate_orientation",
    "candidate_position",
    "centroid_error",
    "cuboid_mesh",
    "default_sweep",
    "dimensional_error",
    "ellipsoid_mesh",
    "exit_code_for",
    "generate_scene",
    "inverse_transform_point",
    "leftmost_region",
    "load_depth",
    "load_mesh",
    "load_scene_config",
    "objective",
    "pixel_support",
    "project",
    "quat_mul",
    "quat_to_matrix",
    "quat_x",
    "quat_y",
    "quat_z",
    "ransac_inliers",
    "refine",
    "render_depth",
    "residual_samples",
    "rotate",
    "run_sweep",
    "sample_candidates",
    "scale_factor",
    "sigma_translate",
    "simulate_rgb_estimate",
    "store_depth",
    "store_mesh",
    "summary_table",
    "tabletop_scene",
    "transform_point",
]
