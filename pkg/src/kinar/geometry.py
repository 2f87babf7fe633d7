"""Frames, rigid transforms and Euler angles.

Conventions used throughout the package:

* lengths in millimetres, angles in radians;
* a :class:`RigidTransform` with ``from_frame=A`` and ``to_frame=B`` maps
  coordinates expressed in A to coordinates expressed in B,
  ``p_B = R @ p_A + T``;
* Euler angles are (alpha, beta, gamma) = (roll about X, pitch about Y,
  yaw about Z) and ``R = Rz(gamma) @ Ry(beta) @ Rx(alpha)``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateFeaturePoints,
    FrameMismatch,
    InconsistentGraph,
    NoPath,
)

WORLD = "world"
WORKPIECE = "workpiece"
CAMERA = "camera"
TURNTABLE = "turntable"
BASE = "base"

ORTHO_TOL = 1e-9
GIMBAL_TOL = 1e-9
FEATURE_TOL = 1e-6  # mm
GRAPH_TOL = 1e-6  # mm, evaluated at a 1 m lever arm
LEVER_ARM = 1000.0


def _vec3(x) -> np.ndarray:
    v = np.array(x, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {np.shape(x)}")
    if not np.all(np.isfinite(v)):
        raise ValueError("coordinates must be finite")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class FramedPoint:
    """A 3D point (mm) tagged with the frame it is expressed in."""

    frame: str
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _vec3(self.coords))

    def __eq__(self, other):
        if not isinstance(other, FramedPoint):
            return NotImplemented
        return self.frame == other.frame and np.array_equal(self.coords, other.coords)

    __hash__ = None


@dataclass(frozen=True)
class EulerAngles:
    """Roll ``alpha`` (X), pitch ``beta`` (Y), yaw ``gamma`` (Z), radians.

    ``gimbal_lock`` is set by :func:`rotation_to_euler` when the input was at
    (or numerically next to) beta = +-pi/2; in that case gamma is pinned to 0.
    """

    alpha: float
    beta: float
    gamma: float
    gimbal_lock: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


def euler_to_rotation(angles: EulerAngles) -> np.ndarray:
    """Rotation matrix ``Rz(gamma) @ Ry(beta) @ Rx(alpha)``, written out in full."""
    ca, sa = np.cos(angles.alpha), np.sin(angles.alpha)
    cb, sb = np.cos(angles.beta), np.sin(angles.beta)
    cg, sg = np.cos(angles.gamma), np.sin(angles.gamma)
    return np.array(
        [
            [cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg],
            [cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg],
            [-sb, sa * cb, ca * cb],
        ]
    )


def _wrap(angle: float) -> float:
    # atan2 may return -pi; the canonical range is (-pi, pi]
    return np.pi if angle <= -np.pi else float(angle)


def rotation_to_euler(rotation) -> EulerAngles:
    """Inverse of :func:`euler_to_rotation`.

    beta = asin(-r31), evaluated as ``atan2(-r31, hypot(r32, r33))`` which is
    the same angle but keeps full precision near +-pi/2. When
    ``|cos(beta)| < 1e-9`` only alpha - gamma (or alpha + gamma) is
    observable; the returned angles then have gamma = 0 and
    ``gimbal_lock=True``.
    """
    r = np.asarray(rotation, dtype=float)
    cb = np.hypot(r[2, 1], r[2, 2])
    beta = float(np.arctan2(-r[2, 0], cb))
    if abs(np.cos(beta)) < GIMBAL_TOL or cb < GIMBAL_TOL:
        # with gamma = 0: r12 = sa*sb, r13 = ca*sb, r22 = ca, r23 = -sa
        alpha = float(np.arctan2(-r[1, 2], r[1, 1]))
        return EulerAngles(_wrap(alpha), beta, 0.0, gimbal_lock=True)
    alpha = float(np.arctan2(r[2, 1], r[2, 2]))
    gamma = float(np.arctan2(r[1, 0], r[0, 0]))
    return EulerAngles(_wrap(alpha), beta, _wrap(gamma))


def orthonormality_residual(rotation) -> float:
    r = np.asarray(rotation, dtype=float)
    return float(np.linalg.norm(r.T @ r - np.eye(3)))


def nearest_rotation(matrix) -> tuple[np.ndarray, float]:
    """Project a 3x3 matrix onto SO(3) (orthogonal Procrustes).

    Returns the rotation and the orthonormality residual of the input.
    """
    m = np.asarray(matrix, dtype=float)
    u, _, vt = np.linalg.svd(m)
    d = np.sign(np.linalg.det(u @ vt))
    rot = u @ np.diag([1.0, 1.0, d]) @ vt
    return rot, orthonormality_residual(m)


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation taking ``from_frame`` coordinates to ``to_frame``."""

    rotation: np.ndarray
    translation: np.ndarray
    from_frame: str
    to_frame: str

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=float)
        if rot.shape != (3, 3) or not np.all(np.isfinite(rot)):
            raise ValueError("rotation must be a finite 3x3 matrix")
        if orthonormality_residual(rot) > ORTHO_TOL or abs(np.linalg.det(rot) - 1.0) > ORTHO_TOL:
            raise ValueError(
                "rotation is not a proper rotation "
                f"(|R^T R - I| = {orthonormality_residual(rot):.3e}, det = {np.linalg.det(rot):.12f})"
            )
        rot.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", _vec3(self.translation))

    @classmethod
    def identity(cls, from_frame: str, to_frame: str | None = None) -> RigidTransform:
        return cls(np.eye(3), np.zeros(3), from_frame, from_frame if to_frame is None else to_frame)

    @classmethod
    def from_matrix(cls, matrix, from_frame: str, to_frame: str) -> RigidTransform:
        m = np.asarray(matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("homogeneous matrix must be 4x4")
        return cls(m[:3, :3], m[:3, 3], from_frame, to_frame)

    @classmethod
    def from_euler(cls, angles: EulerAngles, translation, from_frame: str, to_frame: str) -> RigidTransform:
        return cls(euler_to_rotation(angles), translation, from_frame, to_frame)

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points) -> np.ndarray:
        """Transform an (..., 3) array of raw coordinates (no frame check)."""
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def __eq__(self, other):
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return (
            self.from_frame == other.from_frame
            and self.to_frame == other.to_frame
            and np.array_equal(self.rotation, other.rotation)
            and np.array_equal(self.translation, other.translation)
        )

    __hash__ = None


def transform_point(t: RigidTransform, p: FramedPoint) -> FramedPoint:
    if p.frame != t.from_frame:
        raise FrameMismatch(t.from_frame, p.frame)
    return FramedPoint(t.to_frame, t.rotation @ p.coords + t.translation)


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """``a after b``: maps ``b.from_frame`` to ``a.to_frame``."""
    if b.to_frame != a.from_frame:
        raise FrameMismatch(a.from_frame, b.to_frame)
    rot = a.rotation @ b.rotation
    # re-orthonormalize so long chains do not drift past the 1e-9 invariant
    if orthonormality_residual(rot) > 1e-12:
        rot, _ = nearest_rotation(rot)
    return RigidTransform(rot, a.rotation @ b.translation + a.translation, b.from_frame, a.to_frame)


def invert(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -rt @ t.translation, t.to_frame, t.from_frame)


def transform_distance(a: RigidTransform, b: RigidTransform, lever_arm: float = LEVER_ARM) -> float:
    """Worst-case displacement (mm) between two transforms for points within ``lever_arm``."""
    drot = np.linalg.norm(a.rotation - b.rotation, ord=2)
    return float(drot * lever_arm + np.linalg.norm(a.translation - b.translation))


def build_workpiece_frame(p1: FramedPoint, p3: FramedPoint, p5: FramedPoint, frame: str = WORKPIECE) -> RigidTransform:
    """Workpiece frame from three measured feature points.

    Origin at ``p1``, Z along ``p5 - p1``, Y the part of ``p3 - p1``
    orthogonal to Z, X = Y x Z. The returned transform maps workpiece
    coordinates into the world frame, so its rotation columns are the X, Y, Z
    axes expressed in world coordinates and its translation is ``p1``.
    """
    for p in (p1, p3, p5):
        if p.frame != WORLD:
            raise FrameMismatch(WORLD, p.frame)
    z = p5.coords - p1.coords
    zn = np.linalg.norm(z)
    if zn < FEATURE_TOL:
        raise DegenerateFeaturePoints("p1 and p5 coincide")
    z = z / zn
    d = p3.coords - p1.coords
    y = d - (d @ z) * z
    yn = np.linalg.norm(y)
    if yn < FEATURE_TOL:
        raise DegenerateFeaturePoints(
            f"feature points are collinear (off-axis distance {yn:.3e} mm)"
        )
    y = y / yn
    x = np.cross(y, z)
    return RigidTransform(np.column_stack([x, y, z]), p1.coords, frame, WORLD)


class FrameGraph:
    """A set of known transforms between named frames.

    Edges can be traversed in either direction. Built once, then queried
    with :meth:`resolve`.
    """

    def __init__(self, transforms=()):
        self._edges: dict[tuple[str, str], RigidTransform] = {}
        for t in transforms:
            self.add(t)

    @property
    def frames(self) -> set[str]:
        return {f for key in self._edges for f in key}

    @property
    def edges(self) -> dict[tuple[str, str], RigidTransform]:
        return dict(self._edges)

    def add(self, t: RigidTransform) -> None:
        key = (t.from_frame, t.to_frame)
        if key in self._edges:
            raise ValueError(f"duplicate edge {key[0]} -> {key[1]}")
        reverse = self._edges.get((t.to_frame, t.from_frame))
        if reverse is not None and transform_distance(invert(reverse), t, 1.0) > ORTHO_TOL:
            raise InconsistentGraph(
                f"edge {key[0]} -> {key[1]} is not the inverse of the existing reverse edge"
            )
        self._edges[key] = t

    def _neighbours(self):
        adj: dict[str, list[tuple[str, RigidTransform]]] = {}
        for (a, b), t in self._edges.items():
            # each entry maps coordinates in the neighbour frame into the node frame
            adj.setdefault(a, []).append((b, invert(t)))
            adj.setdefault(b, []).append((a, t))
        return adj

    def resolve(self, from_frame: str, to_frame: str, check: bool = True) -> RigidTransform:
        """Transform mapping ``from_frame`` coordinates to ``to_frame``.

        With ``check`` every cycle in the connected component is verified:
        alternative paths must agree within 1e-6 mm at a 1 m lever arm.
        """
        if from_frame == to_frame:
            return RigidTransform.identity(from_frame)
        adj = self._neighbours()
        if from_frame not in adj or to_frame not in adj:
            raise NoPath(f"no path from {from_frame!r} to {to_frame!r}")
        # BFS spanning tree; to_root[f] maps from_frame coords into f
        to_root = {from_frame: RigidTransform.identity(from_frame)}
        tree_edges = set()
        queue = deque([from_frame])
        while queue:
            node = queue.popleft()
            for nb, t_node_from_nb in adj[node]:
                if nb in to_root:
                    continue
                to_root[nb] = compose(invert(t_node_from_nb), to_root[node])
                tree_edges.add(frozenset((node, nb)))
                queue.append(nb)
        if to_frame not in to_root:
            raise NoPath(f"no path from {from_frame!r} to {to_frame!r}")
        if check:
            for (a, b), t in self._edges.items():
                if a not in to_root or frozenset((a, b)) in tree_edges:
                    continue
                implied = compose(to_root[b], invert(to_root[a]))
                gap = transform_distance(implied, t)
                if gap > GRAPH_TOL:
                    raise InconsistentGraph(
                        f"paths disagree on {a} -> {b} by {gap:.3e} mm at a 1 m lever arm"
                    )
        return to_root[to_frame]
