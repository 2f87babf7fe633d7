"""Pinhole camera: intrinsics, projection matrices, radial distortion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BehindCamera, FrameMismatch, NoConvergence
from .geometry import CAMERA, FramedPoint, RigidTransform

DEPTH_EPSILON = 1e-6  # mm
UNDISTORT_TOL = 1e-10  # normalized image units
UNDISTORT_MAX_ITER = 50
# radial coefficients above this magnitude are unusual for normalized coordinates
LARGE_RADIAL_COEFF = 1.0


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    skew_r: float = 0.0
    u0: float = 0.0
    v0: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    image_width: int = 640
    image_height: int = 480

    def __post_init__(self):
        for name in ("fx", "fy", "skew_r", "u0", "v0", "k1", "k2"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.fx <= 0:
            raise ValueError("fx > 0 violated")
        if self.fy <= 0:
            raise ValueError("fy > 0 violated")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image size must be positive")

    def validation_notes(self) -> list[str]:
        """Soft findings that do not invalidate the intrinsics."""
        notes = []
        if not 0 <= self.u0 < self.image_width:
            notes.append(f"principal point u0={self.u0} lies outside the image width {self.image_width}")
        if not 0 <= self.v0 < self.image_height:
            notes.append(f"principal point v0={self.v0} lies outside the image height {self.image_height}")
        for name in ("k1", "k2"):
            if abs(getattr(self, name)) > LARGE_RADIAL_COEFF:
                notes.append(f"radial coefficient {name}={getattr(self, name)} is unusually large")
        return notes


@dataclass(frozen=True)
class PixelPoint:
    u: float
    v: float

    def __post_init__(self):
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))
        if not (np.isfinite(self.u) and np.isfinite(self.v)):
            raise ValueError("pixel coordinates must be finite")

    def in_image(self, c: CameraIntrinsics) -> bool:
        return 0 <= self.u < c.image_width and 0 <= self.v < c.image_height

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v])


@dataclass(frozen=True)
class ProjectionMatrix:
    m: np.ndarray
    source_frame: str

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (3, 4):
            raise ValueError("projection matrix must be 3x4")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def project(self, points) -> np.ndarray:
        """Raw homogeneous multiply + divide for an (N, 3) array; no depth check."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        h = pts @ self.m[:, :3].T + self.m[:, 3]
        return h[:, :2] / h[:, 2:3]

    def depths(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ self.m[2, :3] + self.m[2, 3]


def intrinsic_matrix(c: CameraIntrinsics) -> np.ndarray:
    return np.array(
        [
            [c.fx, c.skew_r, c.u0],
            [0.0, c.fy, c.v0],
            [0.0, 0.0, 1.0],
        ]
    )


def _check_extrinsic(extrinsic: RigidTransform):
    if extrinsic.to_frame != CAMERA:
        raise FrameMismatch(CAMERA, extrinsic.to_frame)


def build_projection(c: CameraIntrinsics, extrinsic: RigidTransform) -> ProjectionMatrix:
    """``K @ [R | T]`` for an extrinsic mapping some frame into the camera frame."""
    _check_extrinsic(extrinsic)
    rt = np.column_stack([extrinsic.rotation, extrinsic.translation])
    return ProjectionMatrix(intrinsic_matrix(c) @ rt, extrinsic.from_frame)


def project_points(c: CameraIntrinsics, extrinsic: RigidTransform, points) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised projection of raw (N, 3) coordinates in ``extrinsic.from_frame``.

    Returns ``(pixels, depths)``; rows with depth <= DEPTH_EPSILON are NaN.
    """
    _check_extrinsic(extrinsic)
    pc = extrinsic.apply(np.atleast_2d(points))
    depth = pc[:, 2]
    ok = depth > DEPTH_EPSILON
    with np.errstate(divide="ignore", invalid="ignore"):
        x = pc[:, 0] / depth
        y = pc[:, 1] / depth
    uv = np.column_stack([c.fx * x + c.skew_r * y + c.u0, c.fy * y + c.v0])
    uv[~ok] = np.nan
    return uv, depth


def project_point(c: CameraIntrinsics, extrinsic: RigidTransform, p: FramedPoint) -> PixelPoint:
    """Ideal (undistorted) pixel of a point."""
    if p.frame != extrinsic.from_frame:
        raise FrameMismatch(extrinsic.from_frame, p.frame)
    uv, depth = project_points(c, extrinsic, p.coords)
    if not depth[0] > DEPTH_EPSILON:
        raise BehindCamera(float(depth[0]))
    return PixelPoint(uv[0, 0], uv[0, 1])


def back_project_to_plane(c: CameraIntrinsics, pose: RigidTransform, uv, plane_point, plane_normal) -> np.ndarray:
    """Intersect pixel rays with a plane.

    ``pose`` maps camera coordinates into the frame the plane is given in
    (i.e. the inverse of an extrinsic). ``uv`` is an (N, 2) array of ideal
    pixels; returns (N, 3) intersection points.
    """
    if pose.from_frame != CAMERA:
        raise FrameMismatch(CAMERA, pose.from_frame)
    uv = np.atleast_2d(np.asarray(uv, dtype=float))
    y = (uv[:, 1] - c.v0) / c.fy
    x = (uv[:, 0] - c.u0 - c.skew_r * y) / c.fx
    rays = np.column_stack([x, y, np.ones_like(x)]) @ pose.rotation.T
    n = np.asarray(plane_normal, dtype=float)
    lam = ((np.asarray(plane_point, dtype=float) - pose.translation) @ n) / (rays @ n)
    return pose.translation + lam[:, None] * rays


def _radial_scale(c: CameraIntrinsics, r2):
    return 1.0 + c.k1 * r2 + c.k2 * r2 * r2


def distort_normalized(c: CameraIntrinsics, xy) -> np.ndarray:
    xy = np.asarray(xy, dtype=float)
    r2 = np.sum(xy * xy, axis=-1, keepdims=True)
    return xy * _radial_scale(c, r2)


def undistort_normalized(c: CameraIntrinsics, xy_d, tol: float = UNDISTORT_TOL, max_iter: int = UNDISTORT_MAX_ITER) -> np.ndarray:
    """Fixed-point inversion of the radial model.

    Iterates ``x <- x_d / s(|x|^2)`` until the update stalls at round-off or
    ``max_iter`` is reached, then requires the forward residual to be within
    ``tol``.
    """
    xy_d = np.asarray(xy_d, dtype=float)
    xy = xy_d.copy()
    for it in range(1, max_iter + 1):
        r2 = np.sum(xy * xy, axis=-1, keepdims=True)
        new = xy_d / _radial_scale(c, r2)
        step = np.max(np.abs(new - xy)) if new.size else 0.0
        xy = new
        if not np.isfinite(step):
            break
        if step <= 4 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(xy), initial=0.0))):
            break
    residual = float(np.max(np.abs(distort_normalized(c, xy) - xy_d), initial=0.0))
    if not np.isfinite(residual) or residual > tol:
        raise NoConvergence(residual, it)
    return xy


def _to_normalized(c: CameraIntrinsics, uv):
    return np.column_stack([(uv[:, 0] - c.u0) / c.fx, (uv[:, 1] - c.v0) / c.fy])


def _from_normalized(c: CameraIntrinsics, xy):
    return np.column_stack([xy[:, 0] * c.fx + c.u0, xy[:, 1] * c.fy + c.v0])


def distort_pixels(c: CameraIntrinsics, uv) -> np.ndarray:
    uv = np.atleast_2d(np.asarray(uv, dtype=float))
    return _from_normalized(c, distort_normalized(c, _to_normalized(c, uv)))


def undistort_pixels(c: CameraIntrinsics, uv, tol: float = UNDISTORT_TOL) -> np.ndarray:
    uv = np.atleast_2d(np.asarray(uv, dtype=float))
    return _from_normalized(c, undistort_normalized(c, _to_normalized(c, uv), tol=tol))


def apply_distortion(c: CameraIntrinsics, ideal: PixelPoint) -> PixelPoint:
    """Where an ideal pixel lands after radial lens distortion."""
    uv = distort_pixels(c, ideal.as_array())
    return PixelPoint(uv[0, 0], uv[0, 1])


def undistort(c: CameraIntrinsics, observed: PixelPoint) -> PixelPoint:
    uv = undistort_pixels(c, observed.as_array())
    return PixelPoint(uv[0, 0], uv[0, 1])
