"""Kinematic registration of AR overlays for an encoder-tracked rail camera."""
from .camera import (
    CameraIntrinsics,
    PixelPoint,
    ProjectionMatrix,
    apply_distortion,
    build_projection,
    intrinsic_matrix,
    project_point,
    undistort,
)
from .error_model import (
    ChainParameters,
    UncertaintyBudget,
    UncertaintyInputs,
    error_transfer_coefficients,
    monte_carlo_sigma,
    propagate_sigma,
    sensitivity_sweep,
    world_from_camera_simplified,
)
from .geometry import (
    CAMERA,
    TURNTABLE,
    WORKPIECE,
    WORLD,
    EulerAngles,
    FrameGraph,
    FramedPoint,
    RigidTransform,
    build_workpiece_frame,
    compose,
    euler_to_rotation,
    invert,
    rotation_to_euler,
    transform_point,
)
from .pose_solver import Correspondence, PoseSolution, extract_extrinsics, reprojection_residual, solve_dlt, solve_pose
from .rig_sim import (
    EncoderModel,
    NoiseSpec,
    RigState,
    TrackGeometry,
    TrackingSample,
    camera_pose,
    encoder_to_arclength,
    overlay_pixel,
    rms_error,
    run_static_experiment,
    run_tracking_experiment,
    track_pose_at,
)
from .scene import SceneConfig

__version__ = "0.1.0"

__all__ = [
    "apply_distortion",
    "build_projection",
    "build_workpiece_frame",
    "CAMERA",
    "camera_pose",
    "CameraIntrinsics",
    "ChainParameters",
    "compose",
    "Correspondence",
    "encoder_to_arclength",
    "EncoderModel",
    "error_transfer_coefficients",
    "euler_to_rotation",
    "EulerAngles",
    "extract_extrinsics",
    "FramedPoint",
    "FrameGraph",
    "intrinsic_matrix",
    "invert",
    "monte_carlo_sigma",
    "NoiseSpec",
    "overlay_pixel",
    "PixelPoint",
    "PoseSolution",
    "project_point",
    "ProjectionMatrix",
    "propagate_sigma",
    "reprojection_residual",
    "RigidTransform",
    "RigState",
    "rms_error",
    "rotation_to_euler",
    "run_static_experiment",
    "run_tracking_experiment",
    "SceneConfig",
    "sensitivity_sweep",
    "solve_dlt",
    "solve_pose",
    "track_pose_at",
    "TrackGeometry",
    "TrackingSample",
    "transform_point",
    "TURNTABLE",
    "UncertaintyBudget",
    "UncertaintyInputs",
    "undistort",
    "WORKPIECE",
    "WORLD",
    "world_from_camera_simplified",
]

