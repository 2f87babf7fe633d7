"""Scene configuration: the validated, in-memory form of a scene file.

Angular quantities are kept in degrees exactly as written in the file so that
dumping and reloading a scene is lossless; the radian-valued core objects
are derived on access.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .camera import CameraIntrinsics
from .error_model import UncertaintyInputs
from .errors import ParseError, ValidationError
from .geometry import CAMERA, TURNTABLE, WORLD, EulerAngles, FramedPoint, RigidTransform, build_workpiece_frame, nearest_rotation
from .rig_sim import EncoderModel, NoiseSpec, TrackGeometry


@dataclass(frozen=True)
class UncertaintyConfig:
    sigma_alpha_deg: float = 0.0
    sigma_beta_deg: float = 0.0
    sigma_tx_mm: float = 0.0
    sigma_ty_mm: float = 0.0
    sigma_tz_mm: float = 0.0

    def inputs(self) -> UncertaintyInputs:
        return UncertaintyInputs(
            np.radians(self.sigma_alpha_deg),
            np.radians(self.sigma_beta_deg),
            self.sigma_tx_mm,
            self.sigma_ty_mm,
            self.sigma_tz_mm,
        )


@dataclass(frozen=True)
class NoiseConfig:
    quantization: bool = False
    turntable_sigma_deg: float = 0.0
    pixel_sigma_px: float = 0.0
    seed: int = 0

    def spec(self, seed: int | None = None) -> NoiseSpec:
        return NoiseSpec(
            self.quantization,
            float(np.radians(self.turntable_sigma_deg)),
            self.pixel_sigma_px,
            self.seed if seed is None else seed,
        )


@dataclass(frozen=True)
class StaticConfig:
    observation_points_mm: tuple = (0.0, 300.0, 1500.0)
    trials: int = 30


@dataclass(frozen=True)
class TrackingConfig:
    speed_mm_s: float = 100.0
    duration_s: float = 15.0
    dt_s: float = 0.1
    offset_mm: float = 0.0


@dataclass(frozen=True)
class SceneConfig:
    intrinsics: CameraIntrinsics
    m_cr_matrix: tuple
    track: TrackGeometry
    encoder: EncoderModel
    p1: tuple
    p3: tuple
    p5: tuple
    anchor_offset: tuple = (0.0, 0.0, 0.0)
    start_mm: float = 0.0
    alpha_deg: float = 0.0
    beta_deg: float = 0.0
    uncertainty: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    static: StaticConfig = field(default_factory=StaticConfig)
    tracking: TrackingConfig = field(default_factory=TrackingConfig)

    @cached_property
    def _m_cr(self) -> tuple[RigidTransform, float]:
        m = np.array(self.m_cr_matrix, dtype=float)
        rot, residual = nearest_rotation(m[:3, :3])
        return RigidTransform(rot, m[:3, 3], CAMERA, TURNTABLE), residual

    @property
    def m_cr(self) -> RigidTransform:
        """Hand-eye transform with its rotation block projected onto SO(3)."""
        return self._m_cr[0]

    @property
    def m_cr_residual(self) -> float:
        """|R^T R - I| of the rotation block as written in the file."""
        return self._m_cr[1]

    @property
    def turntable(self) -> EulerAngles:
        return EulerAngles(np.radians(self.alpha_deg), np.radians(self.beta_deg), 0.0)

    @cached_property
    def workpiece_pose(self) -> RigidTransform:
        return build_workpiece_frame(*(FramedPoint(WORLD, p) for p in (self.p1, self.p3, self.p5)))

    def anchor_world(self) -> np.ndarray:
        """World position of the object's reference point (workpiece frame offset)."""
        return self.workpiece_pose.apply(np.asarray(self.anchor_offset, dtype=float))

    def notes(self) -> list[str]:
        out = list(self.intrinsics.validation_notes())
        if self.m_cr_residual > 1e-9:
            out.append(f"m_cr rotation block orthonormalized (|R^T R - I| = {self.m_cr_residual:.3e})")
        return out


# ---------------------------------------------------------------------------
# dict <-> SceneConfig

SCHEMA = {
    "camera": {"fx", "fy", "r", "u0", "v0", "k1", "k2", "width", "height"},
    "m_cr": None,
    "track": {"length_mm", "width_mm", "corner_radius_mm", "height_mm", "heading", "start_mm"},
    "encoder": {"pulses_per_rev", "wheel_circumference_mm"},
    "workpiece": {"p1", "p3", "p5", "anchor_offset_mm"},
    "turntable": {"alpha_deg", "beta_deg"},
    "uncertainty": {"sigma_alpha_deg", "sigma_beta_deg", "sigma_tx_mm", "sigma_ty_mm", "sigma_tz_mm"},
    "noise": {"quantization", "turntable_sigma_deg", "pixel_sigma_px", "seed"},
    "experiments": {"static", "tracking"},
}
EXPERIMENT_SCHEMA = {
    "static": {"observation_points_mm", "trials"},
    "tracking": {"speed_mm_s", "duration_s", "dt_s", "offset_mm"},
}
REQUIRED = ("camera", "m_cr", "track", "encoder", "workpiece")


def _check_keys(section: dict, allowed: set, path: tuple, marks: dict):
    for key in section:
        if key not in allowed:
            line, col = marks.get((*path, key), (None, None))
            dotted = ".".join((*path, str(key)))
            raise ParseError(f"unknown key '{dotted}'", line, col)


def _fail(path, message, marks):
    line, col = marks.get(tuple(path), (None, None))
    where = f" (line {line}, column {col})" if line is not None else ""
    raise ValidationError(f"{'.'.join(path)}: {message}{where}")


def _section(data, name, marks, required=False):
    if name not in data:
        if required:
            raise ValidationError(f"missing required section '{name}'")
        return {}
    sec = data[name]
    if not isinstance(sec, dict):
        _fail((name,), "expected a mapping", marks)
    return sec


def _vec(value, path, marks, n=3):
    try:
        v = tuple(float(x) for x in value)
    except (TypeError, ValueError):
        _fail(path, f"expected a list of {n} numbers", marks)
    if len(v) != n or not all(np.isfinite(v)):
        _fail(path, f"expected a list of {n} finite numbers", marks)
    return v


def _num(sec, key, default, path, marks, kind=float):
    if key not in sec:
        if default is None:
            _fail((*path, key), "required value missing", marks)
        return default
    value = sec[key]
    if isinstance(value, bool) and kind is not bool:
        _fail((*path, key), "expected a number", marks)
    try:
        return kind(value)
    except (TypeError, ValueError):
        _fail((*path, key), f"expected {kind.__name__}", marks)


def scene_from_dict(data: dict, marks: dict | None = None) -> SceneConfig:
    """Validate a parsed scene mapping.

    ``marks`` maps key paths (tuples) to ``(line, column)`` for diagnostics.
    """
    marks = marks or {}
    if not isinstance(data, dict):
        raise ValidationError("scene file must contain a mapping at top level")
    _check_keys(data, set(SCHEMA), (), marks)
    for name in REQUIRED:
        if name not in data:
            raise ValidationError(f"missing required section '{name}'")
    for name, allowed in SCHEMA.items():
        if allowed is not None and name in data:
            _check_keys(_section(data, name, marks), allowed, (name,), marks)
    exp = _section(data, "experiments", marks)
    for name, allowed in EXPERIMENT_SCHEMA.items():
        if name in exp:
            if not isinstance(exp[name], dict):
                _fail(("experiments", name), "expected a mapping", marks)
            _check_keys(exp[name], allowed, ("experiments", name), marks)

    cam = _section(data, "camera", marks, True)
    p = ("camera",)
    try:
        intrinsics = CameraIntrinsics(
            fx=_num(cam, "fx", None, p, marks),
            fy=_num(cam, "fy", None, p, marks),
            skew_r=_num(cam, "r", 0.0, p, marks),
            u0=_num(cam, "u0", None, p, marks),
            v0=_num(cam, "v0", None, p, marks),
            k1=_num(cam, "k1", 0.0, p, marks),
            k2=_num(cam, "k2", 0.0, p, marks),
            image_width=_num(cam, "width", 640, p, marks, int),
            image_height=_num(cam, "height", 480, p, marks, int),
        )
    except ValueError as exc:
        raise ValidationError(f"camera: {exc}") from None

    m = data["m_cr"]
    try:
        arr = np.array(m, dtype=float)
    except (TypeError, ValueError):
        _fail(("m_cr",), "expected a 4x4 list of numbers", marks)
    if arr.shape != (4, 4) or not np.all(np.isfinite(arr)):
        _fail(("m_cr",), "expected a 4x4 list of finite numbers", marks)
    if not np.array_equal(arr[3], [0.0, 0.0, 0.0, 1.0]):
        _fail(("m_cr",), "bottom row must be (0, 0, 0, 1)", marks)
    if np.linalg.det(arr[:3, :3]) <= 0:
        _fail(("m_cr",), "rotation block must have positive determinant", marks)
    m_cr = tuple(tuple(float(x) for x in row) for row in arr)

    tr = _section(data, "track", marks, True)
    p = ("track",)
    try:
        track = TrackGeometry(
            length=_num(tr, "length_mm", 6000.0, p, marks),
            width=_num(tr, "width_mm", 3000.0, p, marks),
            corner_radius=_num(tr, "corner_radius_mm", 1000.0, p, marks),
            height=_num(tr, "height_mm", 4000.0, p, marks),
            heading=str(tr.get("heading", "tangent")),
        )
    except ValueError as exc:
        raise ValidationError(f"track: {exc}") from None
    start = _num(tr, "start_mm", 0.0, p, marks)

    en = _section(data, "encoder", marks, True)
    p = ("encoder",)
    try:
        encoder = EncoderModel(
            _num(en, "pulses_per_rev", 1000, p, marks, int),
            _num(en, "wheel_circumference_mm", 200.0, p, marks),
        )
    except ValueError as exc:
        raise ValidationError(f"encoder: {exc}") from None

    wp = _section(data, "workpiece", marks, True)
    pts = {}
    for key in ("p1", "p3", "p5"):
        if key not in wp:
            _fail(("workpiece", key), "required value missing", marks)
        pts[key] = _vec(wp[key], ("workpiece", key), marks)
    anchor = _vec(wp.get("anchor_offset_mm", (0.0, 0.0, 0.0)), ("workpiece", "anchor_offset_mm"), marks)

    tt = _section(data, "turntable", marks)
    unc = _section(data, "uncertainty", marks)
    p = ("uncertainty",)
    uncertainty = UncertaintyConfig(*(_num(unc, k, 0.0, p, marks) for k in (
        "sigma_alpha_deg", "sigma_beta_deg", "sigma_tx_mm", "sigma_ty_mm", "sigma_tz_mm")))
    try:
        uncertainty.inputs()
    except ValueError as exc:
        raise ValidationError(f"uncertainty: {exc}") from None

    nz = _section(data, "noise", marks)
    p = ("noise",)
    quant = nz.get("quantization", False)
    if not isinstance(quant, bool):
        _fail(("noise", "quantization"), "expected true or false", marks)
    noise = NoiseConfig(
        quant,
        _num(nz, "turntable_sigma_deg", 0.0, p, marks),
        _num(nz, "pixel_sigma_px", 0.0, p, marks),
        _num(nz, "seed", 0, p, marks, int),
    )
    try:
        noise.spec()
    except ValueError as exc:
        raise ValidationError(f"noise: {exc}") from None

    st = exp.get("static", {})
    p = ("experiments", "static")
    static = StaticConfig(
        tuple(float(x) for x in st.get("observation_points_mm", StaticConfig.observation_points_mm)),
        _num(st, "trials", 30, p, marks, int),
    )
    if static.trials < 2:
        _fail((*p, "trials"), "trials >= 2 violated", marks)
    tk = exp.get("tracking", {})
    p = ("experiments", "tracking")
    tracking = TrackingConfig(
        _num(tk, "speed_mm_s", 100.0, p, marks),
        _num(tk, "duration_s", 15.0, p, marks),
        _num(tk, "dt_s", 0.1, p, marks),
        _num(tk, "offset_mm", 0.0, p, marks),
    )
    if tracking.dt_s <= 0:
        _fail((*p, "dt_s"), "dt_s > 0 violated", marks)

    scene = SceneConfig(
        intrinsics=intrinsics,
        m_cr_matrix=m_cr,
        track=track,
        encoder=encoder,
        p1=pts["p1"],
        p3=pts["p3"],
        p5=pts["p5"],
        anchor_offset=anchor,
        start_mm=start,
        alpha_deg=_num(tt, "alpha_deg", 0.0, ("turntable",), marks),
        beta_deg=_num(tt, "beta_deg", 0.0, ("turntable",), marks),
        uncertainty=uncertainty,
        noise=noise,
        static=static,
        tracking=tracking,
    )
    try:
        scene.workpiece_pose
    except Exception as exc:  # DegenerateFeaturePoints
        raise ValidationError(f"workpiece: {exc}") from None
    return scene


def scene_to_dict(scene: SceneConfig) -> dict:
    c = scene.intrinsics
    return {
        "camera": {
            "fx": c.fx, "fy": c.fy, "r": c.skew_r, "u0": c.u0, "v0": c.v0,
            "k1": c.k1, "k2": c.k2, "width": c.image_width, "height": c.image_height,
        },
        "m_cr": [list(row) for row in scene.m_cr_matrix],
        "track": {
            "length_mm": scene.track.length,
            "width_mm": scene.track.width,
            "corner_radius_mm": scene.track.corner_radius,
            "height_mm": scene.track.height,
            "heading": scene.track.heading,
            "start_mm": scene.start_mm,
        },
        "encoder": {
            "pulses_per_rev": scene.encoder.pulses_per_rev,
            "wheel_circumference_mm": scene.encoder.wheel_circumference,
        },
        "workpiece": {
            "p1": list(scene.p1),
            "p3": list(scene.p3),
            "p5": list(scene.p5),
            "anchor_offset_mm": list(scene.anchor_offset),
        },
        "turntable": {"alpha_deg": scene.alpha_deg, "beta_deg": scene.beta_deg},
        "uncertainty": {
            "sigma_alpha_deg": scene.uncertainty.sigma_alpha_deg,
            "sigma_beta_deg": scene.uncertainty.sigma_beta_deg,
            "sigma_tx_mm": scene.uncertainty.sigma_tx_mm,
            "sigma_ty_mm": scene.uncertainty.sigma_ty_mm,
            "sigma_tz_mm": scene.uncertainty.sigma_tz_mm,
        },
        "noise": {
            "quantization": scene.noise.quantization,
            "turntable_sigma_deg": scene.noise.turntable_sigma_deg,
            "pixel_sigma_px": scene.noise.pixel_sigma_px,
            "seed": scene.noise.seed,
        },
        "experiments": {
            "static": {
                "observation_points_mm": list(scene.static.observation_points_mm),
                "trials": scene.static.trials,
            },
            "tracking": {
                "speed_mm_s": scene.tracking.speed_mm_s,
                "duration_s": scene.tracking.duration_s,
                "dt_s": scene.tracking.dt_s,
                "offset_mm": scene.tracking.offset_mm,
            },
        },
    }
