"""Deterministic simulation of the rail camera rig.

The camera trolley runs on a closed stadium-shaped rail at fixed height; an
encoder on the drive sprocket reports its travel. A two-axis turntable
(pitch about Y, roll about X) carries the camera through the fixed hand-eye
transform ``m_cr``. Chain, innermost first::

    camera --m_cr--> turntable --Ry(beta) Rx(alpha)--> base --track pose--> world

Experiment simulations compare where the overlay is drawn (using the pose
the rig *believes*, from encoder counts and commanded angles) with where the
real object appears (seen from the true pose).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, PixelPoint, back_project_to_plane, project_point, project_points
from .errors import BehindCamera, EmptyInput, NumericalError
from .geometry import (
    BASE,
    CAMERA,
    TURNTABLE,
    WORLD,
    EulerAngles,
    FramedPoint,
    RigidTransform,
    compose,
    euler_to_rotation,
    invert,
)

RMS_WINDOW_MM = 1500.0
RMS_WINDOW_SAMPLES = 30
HEADINGS = ("tangent", "fixed")


@dataclass(frozen=True)
class TrackGeometry:
    """Stadium rail: bounding box ``length x width`` with rounded corners."""

    length: float = 6000.0
    width: float = 3000.0
    corner_radius: float = 1000.0
    height: float = 4000.0
    heading: str = "tangent"

    def __post_init__(self):
        for name in ("length", "width", "corner_radius", "height"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.corner_radius > 0:
            raise ValueError("corner_radius > 0 violated")
        if 2 * self.corner_radius > min(self.length, self.width):
            raise ValueError("2 * corner_radius <= min(length, width) violated")
        if self.heading not in HEADINGS:
            raise ValueError(f"heading must be one of {HEADINGS}")

    @property
    def straight_x(self) -> float:
        return self.length - 2 * self.corner_radius

    @property
    def straight_y(self) -> float:
        return self.width - 2 * self.corner_radius

    @property
    def perimeter(self) -> float:
        return 2 * self.straight_x + 2 * self.straight_y + 2 * np.pi * self.corner_radius

    def segments(self):
        """(kind, start_s, length, start_xy, heading) for the 8 segments, CCW from (r, 0)."""
        r = self.corner_radius
        quarter = 0.5 * np.pi * r
        out = []
        s = 0.0
        xy = np.array([r, 0.0])
        for k in range(4):
            theta = 0.5 * np.pi * k
            length = self.straight_x if k % 2 == 0 else self.straight_y
            direction = np.array([np.cos(theta), np.sin(theta)])
            out.append(("straight", s, length, xy.copy(), theta))
            s += length
            xy = xy + length * direction
            out.append(("arc", s, quarter, xy.copy(), theta))
            s += quarter
            # corner end point: advance r along heading, then r along the left normal
            normal = np.array([-np.sin(theta), np.cos(theta)])
            xy = xy + r * direction + r * normal
        return out


@dataclass(frozen=True)
class EncoderModel:
    pulses_per_rev: int = 1000
    wheel_circumference: float = 200.0  # mm; not a measured rig value

    def __post_init__(self):
        if int(self.pulses_per_rev) != self.pulses_per_rev or self.pulses_per_rev < 1:
            raise ValueError("pulses_per_rev >= 1 violated")
        object.__setattr__(self, "pulses_per_rev", int(self.pulses_per_rev))
        object.__setattr__(self, "wheel_circumference", float(self.wheel_circumference))
        if not self.wheel_circumference > 0:
            raise ValueError("wheel_circumference > 0 violated")

    @property
    def pulse_length(self) -> float:
        return self.wheel_circumference / self.pulses_per_rev


@dataclass(frozen=True)
class RigState:
    encoder_counts: int
    turntable: EulerAngles
    timestamp: float = 0.0


@dataclass(frozen=True)
class NoiseSpec:
    quantization: bool = False
    turntable_sigma: float = 0.0  # rad
    pixel_sigma: float = 0.0  # px
    seed: int = 0

    def __post_init__(self):
        if self.turntable_sigma < 0 or self.pixel_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def is_zero(self) -> bool:
        return not self.quantization and self.turntable_sigma == 0 and self.pixel_sigma == 0


@dataclass(frozen=True)
class TrackingSample:
    t: float
    expected_offset: float
    measured_offset: float
    error: float


def encoder_to_arclength(e: EncoderModel, counts: int) -> float:
    return counts / e.pulses_per_rev * e.wheel_circumference


def arclength_to_counts(e: EncoderModel, s: float) -> int:
    """Counts registered after travelling ``s`` mm (the encoder truncates)."""
    return int(np.floor(s / e.pulse_length))


def track_position(g: TrackGeometry, s: float) -> tuple[np.ndarray, float]:
    """Centerline point (x, y, z) and tangent heading angle at arclength ``s``."""
    s = float(np.mod(s, g.perimeter))
    r = g.corner_radius
    segs = g.segments()
    for kind, start, length, xy0, theta in reversed(segs):
        if s >= start:
            break
    u = s - start
    if kind == "straight":
        xy = xy0 + u * np.array([np.cos(theta), np.sin(theta)])
        heading = theta
    else:
        center = xy0 + r * np.array([-np.sin(theta), np.cos(theta)])
        phi = theta - 0.5 * np.pi + u / r
        xy = center + r * np.array([np.cos(phi), np.sin(phi)])
        heading = theta + u / r
    return np.array([xy[0], xy[1], g.height]), heading


def track_pose_at(g: TrackGeometry, s: float) -> RigidTransform:
    """Pose of the trolley base in the world (maps base coordinates to world).

    Base X follows the path tangent (or stays on world X for the ``fixed``
    heading), base Z points down at the floor, Y completes a right-handed
    frame.
    """
    pos, heading = track_position(g, s)
    if g.heading == "fixed":
        heading = 0.0
    c, sn = np.cos(heading), np.sin(heading)
    rot = np.array([[c, sn, 0.0], [sn, -c, 0.0], [0.0, 0.0, -1.0]])
    return RigidTransform(rot, pos, BASE, WORLD)


def turntable_transform(angles: EulerAngles) -> RigidTransform:
    """Turntable -> base; only pitch and roll are driven, yaw is ignored."""
    return RigidTransform(euler_to_rotation(EulerAngles(angles.alpha, angles.beta, 0.0)), np.zeros(3), TURNTABLE, BASE)


def camera_pose(g: TrackGeometry, e: EncoderModel, m_cr: RigidTransform, state: RigState, start: float = 0.0) -> RigidTransform:
    """Camera -> world pose for a rig state (encoder counts are travel from ``start``)."""
    s = start + encoder_to_arclength(e, state.encoder_counts)
    return compose(track_pose_at(g, s), compose(turntable_transform(state.turntable), m_cr))


def pose_at_arclength(g: TrackGeometry, m_cr: RigidTransform, s: float, angles: EulerAngles) -> RigidTransform:
    return compose(track_pose_at(g, s), compose(turntable_transform(angles), m_cr))


def overlay_pixel(c: CameraIntrinsics, pose: RigidTransform, anchor_world: FramedPoint) -> PixelPoint:
    """Screen location at which the overlay's anchor must be drawn.

    ``pose`` is either the camera pose (camera -> world) or the extrinsic
    (world -> camera).
    """
    extrinsic = invert(pose) if pose.from_frame == CAMERA else pose
    return project_point(c, extrinsic, anchor_world)


# ---------------------------------------------------------------------------
# experiments


def trial_rng(seed: int, *indices: int) -> np.random.Generator:
    """Independent stream for ``(seed, indices...)``; order of execution is irrelevant."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, indices)]))


def _measured_offsets(c, true_pose, believed_pose, virtual, real, expected, pixel_noise) -> np.ndarray:
    """Offsets along world X between overlay and object, as read off the screen.

    The overlay is drawn at the pixel computed from ``believed_pose``; the
    reading back-projects both image positions (plus measurement noise) onto
    the horizontal plane through the object using the true camera pose. The
    result is ``expected`` plus the deviation of that reading from the ideal
    one, which makes the noise-free case exact.

    ``pixel_noise`` has shape (m, 4): (du, dv) for the overlay then the
    object, one row per reading. Rows whose rays miss the plane come back NaN.
    """
    true_ext = invert(true_pose)
    believed_ext = invert(believed_pose)
    uv_drawn, d1 = project_points(c, believed_ext, virtual)
    uv_ideal, d2 = project_points(c, true_ext, np.vstack([virtual, real]))
    for d in (*d1, *d2):
        if not np.isfinite(d) or d <= 0:
            raise BehindCamera(float(d))
    noise = np.atleast_2d(pixel_noise)
    ideal = back_project_to_plane(c, true_pose, uv_ideal, real, (0.0, 0.0, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        seen_virtual = back_project_to_plane(c, true_pose, uv_drawn[0] + noise[:, :2], real, (0.0, 0.0, 1.0))
        seen_real = back_project_to_plane(c, true_pose, uv_ideal[1] + noise[:, 2:], real, (0.0, 0.0, 1.0))
    out = expected + (seen_virtual[:, 0] - ideal[0, 0]) - (seen_real[:, 0] - ideal[1, 0])
    out[~np.isfinite(out)] = np.nan
    return out


def _believed_travel(e: EncoderModel, travel: float, noise: NoiseSpec) -> float:
    if noise.quantization:
        return encoder_to_arclength(e, arclength_to_counts(e, travel))
    return travel


def _true_angles(commanded: EulerAngles, noise: NoiseSpec, rng) -> EulerAngles:
    if noise.turntable_sigma == 0:
        return commanded
    da, db = rng.normal(0.0, noise.turntable_sigma, 2)
    return EulerAngles(commanded.alpha + da, commanded.beta + db, 0.0)


def _pixel_noise(noise: NoiseSpec, rng) -> np.ndarray:
    if noise.pixel_sigma == 0:
        return np.zeros(4)
    return rng.normal(0.0, noise.pixel_sigma, 4)


def _try_offsets(c, true_pose, believed_pose, virtual, real, expected, noise_rows) -> np.ndarray:
    """As :func:`_measured_offsets`, with numerical failures turned into NaN rows."""
    noise_rows = np.asarray(noise_rows, dtype=float).reshape(-1, 4)
    try:
        return _measured_offsets(c, true_pose, believed_pose, virtual, real, expected, noise_rows)
    except NumericalError:
        return np.full(len(noise_rows), np.nan)


@dataclass(frozen=True)
class StaticRow:
    label: str
    position_mm: float
    mean_mm: float
    std_mm: float
    trials: int
    failed: int


STATIC_LABELS = ("initial point", "first point", "second point")


def run_static_experiment(scene, observation_points, trials: int, noise: NoiseSpec) -> list[StaticRow]:
    """Repeated overlay-offset measurements at fixed camera positions.

    At each observation point the camera has travelled ``d`` mm from its
    start and the overlay is placed ``d`` mm along world X from the object,
    so the configured offset equals ``d``.
    """
    if trials < 2:
        raise ValueError("trials >= 2 required")
    commanded = scene.turntable
    real = scene.anchor_world()
    x_hat = np.array([1.0, 0.0, 0.0])
    rows = []
    for k, d in enumerate(observation_points):
        d = float(d)
        virtual = real + d * x_hat
        believed = pose_at_arclength(
            scene.track, scene.m_cr, scene.start_mm + _believed_travel(scene.encoder, d, noise), commanded
        )
        fixed_pose = pose_at_arclength(scene.track, scene.m_cr, scene.start_mm + d, commanded)
        rngs = [trial_rng(noise.seed, k, i) for i in range(trials)]
        if noise.turntable_sigma == 0:
            # one shared true pose: read all trials in a single batch
            readings = _try_offsets(scene.intrinsics, fixed_pose, believed, virtual, real, d, [_pixel_noise(noise, r) for r in rngs])
        else:
            readings = np.concatenate(
                [
                    _try_offsets(
                        scene.intrinsics,
                        pose_at_arclength(scene.track, scene.m_cr, scene.start_mm + d, _true_angles(commanded, noise, r)),
                        believed,
                        virtual,
                        real,
                        d,
                        [_pixel_noise(noise, r)],
                    )
                    for r in rngs
                ]
            )
        ok = np.isfinite(readings)
        v = readings[ok]
        failed = int(np.count_nonzero(~ok))
        mean = float(v.mean()) if v.size else float("nan")
        std = float(v.std(ddof=1)) if v.size > 1 else float("nan")
        label = STATIC_LABELS[k] if k < len(STATIC_LABELS) else f"point {k}"
        rows.append(StaticRow(label, d, mean, std, trials, failed))
    return rows


@dataclass(frozen=True)
class TrackingResult:
    samples: list
    rms_mm: float
    rms_percent: float
    window_indices: tuple


def rms_error(samples) -> float:
    """Root mean square of sample errors against an ideal error of zero (mm)."""
    errors = [s.error if isinstance(s, TrackingSample) else float(s) for s in samples]
    if not errors:
        raise EmptyInput("no samples")
    e = np.asarray(errors, dtype=float)
    return float(np.sqrt(np.mean(e * e)))


def rms_percent(rms_mm: float, length_mm: float) -> float:
    return 100.0 * rms_mm / length_mm


def window_indices(samples, speed: float, window: float = RMS_WINDOW_MM, n: int = RMS_WINDOW_SAMPLES) -> tuple:
    """``n`` uniformly spaced sample indices within the first ``window`` mm of travel."""
    eligible = [i for i, s in enumerate(samples) if speed * s.t <= window * (1 + 1e-12)]
    if len(eligible) <= n:
        return tuple(eligible)
    picks = np.round(np.linspace(0, len(eligible) - 1, n)).astype(int)
    return tuple(eligible[p] for p in picks)


def run_tracking_experiment(
    scene,
    target_speed: float,
    duration: float,
    dt: float,
    noise: NoiseSpec,
    offset: float = 0.0,
) -> TrackingResult:
    """Camera follows a target moving along world X at ``target_speed`` mm/s.

    Samples are taken at ``dt, 2 dt, ... <= duration``. The overlay is held
    ``offset`` mm ahead of the target; each sample records the measured
    overlay-to-target distance. The RMS uses 30 samples spread over the first
    1500 mm of travel.
    """
    if dt <= 0:
        raise ValueError("dt > 0 required")
    if duration < 0 or target_speed < 0:
        raise ValueError("duration and speed must be >= 0")
    n = int(np.floor(duration / dt + 1e-9))
    commanded = scene.turntable
    start_real = scene.anchor_world()
    x_hat = np.array([1.0, 0.0, 0.0])
    samples = []
    for k in range(1, n + 1):
        t = k * dt
        travel = target_speed * t
        rng = trial_rng(noise.seed, k)
        real = start_real + travel * x_hat
        virtual = real + offset * x_hat
        believed = pose_at_arclength(
            scene.track, scene.m_cr, scene.start_mm + _believed_travel(scene.encoder, travel, noise), commanded
        )
        true_pose = pose_at_arclength(scene.track, scene.m_cr, scene.start_mm + travel, _true_angles(commanded, noise, rng))
        measured = float(_measured_offsets(scene.intrinsics, true_pose, believed, virtual, real, offset, _pixel_noise(noise, rng))[0])
        if not np.isfinite(measured):
            raise NumericalError(f"overlay reading failed at t = {t:g} s")
        samples.append(TrackingSample(t, offset, measured, measured - offset))
    if not samples:
        raise EmptyInput("tracking run produced no samples (duration shorter than dt)")
    idx = window_indices(samples, target_speed)
    rms = rms_error([samples[i] for i in idx])
    window = min(RMS_WINDOW_MM, target_speed * samples[idx[-1]].t) if target_speed > 0 else 0.0
    pct = rms_percent(rms, window) if window > 0 else float("nan")
    return TrackingResult(samples, rms, pct, idx)


def simulate_trajectory(scene, states) -> list[tuple[RigState, RigidTransform, PixelPoint | None]]:
    """Camera pose and overlay pixel of the scene anchor for each rig state."""
    anchor = FramedPoint(WORLD, scene.anchor_world())
    out = []
    for state in states:
        pose = camera_pose(scene.track, scene.encoder, scene.m_cr, state, scene.start_mm)
        try:
            px = overlay_pixel(scene.intrinsics, pose, anchor)
        except BehindCamera:
            px = None
        out.append((state, pose, px))
    return out
