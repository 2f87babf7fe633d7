"""Linear (DLT) resection of a camera from world/pixel correspondences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import DEPTH_EPSILON, CameraIntrinsics, PixelPoint, ProjectionMatrix, intrinsic_matrix
from .errors import (
    DegenerateConfiguration,
    EmptyInput,
    NonPhysical,
    SingularIntrinsics,
    TooFewPoints,
)
from .geometry import (
    CAMERA,
    WORLD,
    EulerAngles,
    FramedPoint,
    RigidTransform,
    nearest_rotation,
    orthonormality_residual,
    rotation_to_euler,
)

MIN_POINTS = 6
DEGENERACY_THRESHOLD = 1e-8
NONPHYSICAL_RESIDUAL = 0.1


@dataclass(frozen=True)
class Correspondence:
    world: FramedPoint
    pixel: PixelPoint


@dataclass(frozen=True)
class ResidualReport:
    errors: np.ndarray  # px per point, NaN where the point is behind the camera
    rms: float
    n_behind: int


@dataclass(frozen=True)
class PoseSolution:
    projection: ProjectionMatrix
    extrinsic: RigidTransform
    euler: EulerAngles
    rms_reprojection: float
    condition_indicator: float


def correspondences(world, pixels, frame: str = WORLD) -> list[Correspondence]:
    world = np.atleast_2d(np.asarray(world, dtype=float))
    pixels = np.atleast_2d(np.asarray(pixels, dtype=float))
    if len(world) != len(pixels):
        raise ValueError("world and pixel arrays differ in length")
    return [Correspondence(FramedPoint(frame, w), PixelPoint(*p)) for w, p in zip(world, pixels)]


def _as_arrays(points):
    if not points:
        return np.empty((0, 3)), np.empty((0, 2)), WORLD
    frames = {c.world.frame for c in points}
    if len(frames) != 1:
        raise ValueError(f"world points span several frames: {sorted(frames)}")
    world = np.array([c.world.coords for c in points])
    pixels = np.array([[c.pixel.u, c.pixel.v] for c in points])
    return world, pixels, frames.pop()


def _similarity(pts: np.ndarray) -> np.ndarray:
    """Centroid shift + isotropic scaling to mean distance sqrt(dim)."""
    dim = pts.shape[1]
    centroid = pts.mean(axis=0)
    mean_dist = np.mean(np.linalg.norm(pts - centroid, axis=1))
    s = np.sqrt(dim) / mean_dist if mean_dist > 0 else 1.0
    t = np.eye(dim + 1)
    t[:dim, :dim] *= s
    t[:dim, dim] = -s * centroid
    return t


def design_matrix(world: np.ndarray, pixels: np.ndarray) -> np.ndarray:
    """The 2N x 12 homogeneous system from clearing the perspective divisor."""
    n = len(world)
    xh = np.column_stack([world, np.ones(n)])
    a = np.zeros((2 * n, 12))
    a[0::2, 0:4] = xh
    a[0::2, 8:12] = -pixels[:, :1] * xh
    a[1::2, 4:8] = xh
    a[1::2, 8:12] = -pixels[:, 1:2] * xh
    return a


def _solve(world, pixels, normalize=True):
    if normalize:
        tw = _similarity(world)
        tp = _similarity(pixels)
        wn = world @ tw[:3, :3].T + tw[:3, 3]
        pn = pixels @ tp[:2, :2].T + tp[:2, 2]
    else:
        wn, pn = world, pixels
    a = design_matrix(wn, pn)
    _, s, vt = np.linalg.svd(a)
    indicator = float(s[10] / s[0]) if s[0] > 0 else 0.0
    if indicator < DEGENERACY_THRESHOLD:
        raise DegenerateConfiguration(
            f"world points are degenerate (coplanar or collinear); condition indicator {indicator:.3e}"
        )
    p = vt[-1].reshape(3, 4)
    if normalize:
        p = np.linalg.inv(tp) @ p @ tw
    p = p / np.linalg.norm(p)
    depths = world @ p[2, :3] + p[2, 3]
    if np.sum(np.sign(depths)) < 0:
        p = -p
    return p, indicator


def solve_dlt(points, normalize: bool = True) -> ProjectionMatrix:
    """Projection matrix from >= 6 correspondences.

    Total least squares on the homogeneous system (smallest right singular
    vector), with Hartley-style normalization of both point sets. The result
    has unit Frobenius norm and its sign makes the input points' depths
    positive.
    """
    return _solve_with_indicator(points, normalize)[0]


def _solve_with_indicator(points, normalize=True):
    world, pixels, frame = _as_arrays(points)
    if len(world) < MIN_POINTS:
        raise TooFewPoints(f"need at least {MIN_POINTS} correspondences, got {len(world)}")
    p, indicator = _solve(world, pixels, normalize)
    return ProjectionMatrix(p, frame), indicator


def extract_extrinsics(projection: ProjectionMatrix, c: CameraIntrinsics) -> tuple[RigidTransform, EulerAngles]:
    k = intrinsic_matrix(c)
    if abs(np.linalg.det(k)) < 1e-12:
        raise SingularIntrinsics("intrinsic matrix is singular")
    m = np.linalg.solve(k, projection.m)
    row3 = np.linalg.norm(m[2, :3])
    if row3 == 0:
        raise NonPhysical("projection matrix has a zero depth row")
    m = m / row3
    # a camera is orientation preserving; this also fixes the overall sign
    if np.linalg.det(m[:, :3]) < 0:
        m = -m
    r_approx = m[:, :3]
    residual = orthonormality_residual(r_approx)
    if residual > NONPHYSICAL_RESIDUAL:
        raise NonPhysical(f"left block is far from a rotation (|R^T R - I| = {residual:.3f})")
    rot, _ = nearest_rotation(r_approx)
    extrinsic = RigidTransform(rot, m[:, 3], projection.source_frame, CAMERA)
    return extrinsic, rotation_to_euler(rot)


def reprojection_residual(projection: ProjectionMatrix, points) -> ResidualReport:
    if not points:
        raise EmptyInput("no correspondences")
    world, pixels, _ = _as_arrays(points)
    depth = projection.depths(world)
    behind = depth <= DEPTH_EPSILON
    with np.errstate(divide="ignore", invalid="ignore"):
        uv = projection.project(world)
    err = np.linalg.norm(uv - pixels, axis=1)
    err[behind] = np.nan
    valid = err[~behind]
    rms = float(np.sqrt(np.mean(valid**2))) if valid.size else float("nan")
    return ResidualReport(err, rms, int(behind.sum()))


def solve_pose(points, c: CameraIntrinsics, normalize: bool = True) -> PoseSolution:
    """DLT solve followed by extrinsic extraction with known intrinsics."""
    projection, indicator = _solve_with_indicator(points, normalize)
    extrinsic, euler = extract_extrinsics(projection, c)
    residual = reprojection_residual(projection, points)
    return PoseSolution(projection, extrinsic, euler, residual.rms, indicator)
