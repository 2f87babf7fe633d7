# %% [markdown]
# # Rig simulation
#
# The bundled scene drives a camera around a stadium-shaped rail. Two
# experiments: repeated static readings at fixed positions, and tracking a
# target moving along the straight.

# %%
import logging

import numpy as np

from kinar import NoiseSpec, RigState, camera_pose, io, overlay_pixel, run_static_experiment, run_tracking_experiment
from kinar.geometry import FramedPoint, WORLD

logging.getLogger("kinar").setLevel(logging.ERROR)
scene = io.load_scene(io.paper_scene_path())
anchor = FramedPoint(WORLD, scene.anchor_world())

for counts in (0, 500, 1500):
    pose = camera_pose(scene.track, scene.encoder, scene.m_cr, RigState(counts, scene.turntable))
    print(counts, np.round(pose.translation, 2), overlay_pixel(scene.intrinsics, pose, anchor))

# %%
noise = scene.noise.spec()
for row in run_static_experiment(scene, scene.static.observation_points_mm, scene.static.trials, noise):
    print(f"{row.label:14s} {row.position_mm:7.1f}  mean={row.mean_mm:8.2f}  std={row.std_mm:.2f}")

# %% [markdown]
# Without noise the readings are exact. Quantization alone bounds the
# tracking error by one encoder pulse.

# %%
rows = run_static_experiment(scene, (0.0, 300.0, 1500.0), 5, NoiseSpec())
print([(r.mean_mm, r.std_mm) for r in rows])

quant = run_tracking_experiment(scene, 97.3, 15.0, 0.1, NoiseSpec(quantization=True))
errs = np.array([s.error for s in quant.samples])
print("pulse length:", scene.encoder.pulse_length, " max |error|:", np.abs(errs).max())

# %%
res = run_tracking_experiment(scene, 100.0, 15.0, 0.1, noise)
print(f"rms {res.rms_mm:.3f} mm  ({res.rms_percent:.3f} % of travel) over {len(res.window_indices)} samples")
