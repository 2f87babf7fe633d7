"""File I/O for scenes, CSV tables and reports.

This is the only module (with :mod:`kinar.cli`) that touches the file system
or logs.
"""
from __future__ import annotations

import csv
import logging
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ParseError, ValidationError
from .geometry import WORLD, EulerAngles
from .pose_solver import correspondences
from .report import canonical_json, to_plain
from .rig_sim import RigState
from .scene import SceneConfig, scene_from_dict, scene_to_dict

log = logging.getLogger("kinar")

CORRESPONDENCE_COLUMNS = ("X", "Y", "Z", "u", "v")
TRAJECTORY_COLUMNS = ("t_s", "encoder_counts", "alpha_rad", "beta_rad")
TRACKING_COLUMNS = ("t_s", "expected_mm", "measured_mm", "error_mm")
SWEEP_COLUMNS = ("beta_deg", "s_mm", "sigma_x", "sigma_y", "sigma_z")


def paper_scene_path() -> Path:
    return Path(str(resources.files("kinar") / "data" / "paper_scene.yaml"))


def _key_marks(node, path=(), out=None):
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = (*path, key_node.value)
            out[key] = (key_node.start_mark.line + 1, key_node.start_mark.column + 1)
            _key_marks(value_node, key, out)
    return out


def parse_scene_text(text: str, path=None) -> SceneConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ParseError(getattr(exc, "problem", None) or str(exc), line, col, path) from None
    if data is None:
        raise ParseError("scene file is empty", path=path)
    marks = _key_marks(node) if node is not None else {}
    try:
        return scene_from_dict(data, marks)
    except ParseError as exc:
        if exc.path is not None or path is None:
            raise
        raise ParseError(exc.message, exc.line, exc.column, path) from None


def load_scene(path) -> SceneConfig:
    """Read and validate a YAML (or JSON) scene file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    scene = parse_scene_text(text, path)
    for note in scene.notes():
        log.warning("%s: %s", path, note)
    return scene


def dump_scene_text(scene: SceneConfig) -> str:
    return yaml.safe_dump(scene_to_dict(scene), sort_keys=False, default_flow_style=None)


def dump_scene(scene: SceneConfig, path) -> Path:
    path = Path(path)
    path.write_text(dump_scene_text(scene), encoding="utf-8")
    return path


def _read_table(path, columns):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise ParseError(f"missing columns {missing}", 1, None, path)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append([float(row[c]) for c in columns])
            except (TypeError, ValueError):
                raise ParseError("non-numeric value", lineno, None, path) from None
    return np.array(rows, dtype=float).reshape(-1, len(columns))


def read_correspondences(path, frame: str = WORLD):
    table = _read_table(path, CORRESPONDENCE_COLUMNS)
    return correspondences(table[:, :3], table[:, 3:], frame)


def write_correspondences(path, world, pixels) -> Path:
    rows = np.column_stack([np.atleast_2d(world), np.atleast_2d(pixels)])
    return write_csv(path, CORRESPONDENCE_COLUMNS, rows)


def read_trajectory(path) -> list[RigState]:
    table = _read_table(path, TRAJECTORY_COLUMNS)
    states = []
    for t, counts, alpha, beta in table:
        if counts != int(counts):
            raise ValidationError(f"{path}: encoder_counts must be integers")
        states.append(RigState(int(counts), EulerAngles(alpha, beta, 0.0), float(t)))
    times = [s.timestamp for s in states]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValidationError(f"{path}: t_s must be non-decreasing")
    return states


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    v = to_plain(v)
    if v is None:
        return "nan"
    return repr(v) if isinstance(v, float) else v


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(canonical_json(obj), encoding="utf-8")
    return path
