"""Run reports: canonical JSON, content hashing and reference data."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, is_dataclass

import numpy as np

# Published measurements from the physical rig. They are carried in reports
# for side-by-side reading only; nothing in the simulation is fitted to them.
REFERENCE_VALUES = {
    "static_measurements": {
        "provenance": "paper-table-2",
        "reference_only": True,
        "note": "the accompanying text names 0/300/1500 mm observation points; the table lists 0/300/2000 mm",
        "rows": [
            {"label": "initial point", "position_mm": 0.0, "mean_mm": 0.5, "std_mm": 1.20},
            {"label": "first point", "position_mm": 300.0, "mean_mm": 288.9, "std_mm": 1.35},
            {"label": "second point", "position_mm": 2000.0, "mean_mm": 1499.5, "std_mm": 1.41},
        ],
    },
    "tracking_rms": {
        "provenance": "paper-sec-5.3",
        "reference_only": True,
        "rms_percent": 0.5,
        "window_mm": 1500.0,
        "samples": 30,
    },
    "output_sigmas_mm": {
        "provenance": "paper-sec-5.1",
        "reference_only": True,
        "note": "input sigmas were not published, so these cannot be recomputed",
        "sigma_x": 1.51,
        "sigma_y": 1.55,
        "sigma_z": 1.13,
    },
    "m_cr": {
        "provenance": "paper-eq-14",
        "matrix": [
            [0.9907, 0.1353, -0.0064, 50.843],
            [-0.1396, 0.9915, 0.0093, 47.094],
            [0.0083, -0.0085, 0.9990, 76.177],
            [0.0, 0.0, 0.0, 1.0],
        ],
    },
    "intrinsics": {
        "provenance": "paper-table-1",
        "fx": 3676.462, "fy": 3676.478, "r": 0.263,
        "u0": 645.342, "v0": 508.259, "k1": 1.30, "k2": 1.88,
    },
}


def to_plain(obj):
    """Recursively convert dataclasses/numpy values into JSON-ready Python values.

    Non-finite floats become ``None``.
    """
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def canonical_json(obj) -> str:
    return json.dumps(to_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def content_hash(text: str) -> str:
    """Git blob hash of ``text`` (sha1 over ``blob <len>\\0<bytes>``)."""
    data = text.encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def build_report(kind: str, scene_dict: dict, seed, results, references=()) -> dict:
    config = to_plain(scene_dict)
    return {
        "kind": kind,
        "config": config,
        "config_hash": content_hash(canonical_json(config)),
        "seed": seed,
        "results": to_plain(results),
        "reference": {name: REFERENCE_VALUES[name] for name in references},
    }
