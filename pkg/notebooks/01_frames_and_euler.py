# %% [markdown]
# # Frames and Euler angles
#
# Rotations use R = Rz(gamma) Ry(beta) Rx(alpha). Every transform carries
# the names of the frames it maps between, so composing mismatched frames
# fails loudly.

# %%
import numpy as np

from kinar import (
    CAMERA,
    TURNTABLE,
    WORLD,
    EulerAngles,
    FrameGraph,
    FramedPoint,
    RigidTransform,
    compose,
    euler_to_rotation,
    invert,
    rotation_to_euler,
    transform_point,
)
from kinar.errors import FrameMismatch

np.set_printoptions(precision=6, suppress=True)

# %%
angles = EulerAngles(np.radians(10), np.radians(-25), np.radians(40))
R = euler_to_rotation(angles)
print(R)
print("R^T R - I:", np.abs(R.T @ R - np.eye(3)).max())
back = rotation_to_euler(R)
print("recovered (deg):", np.degrees(back.as_array()))

# %% [markdown]
# At beta = 90 deg only alpha - gamma is observable. The extractor sets
# gamma to zero and raises a flag instead of returning noise.

# %%
locked = rotation_to_euler(euler_to_rotation(EulerAngles(0.3, np.pi / 2, 0.1)))
print(locked)

# %%
cam_to_tt = RigidTransform.from_euler(EulerAngles(0.0, 0.0, 0.1), [50.0, 47.0, 76.0], CAMERA, TURNTABLE)
tt_to_world = RigidTransform.from_euler(EulerAngles(0.0, 0.2, 0.0), [1000.0, 0.0, 4000.0], TURNTABLE, WORLD)
cam_to_world = compose(tt_to_world, cam_to_tt)
p = FramedPoint(CAMERA, [100.0, 100.0, 3000.0])
print(transform_point(cam_to_world, p))
print(transform_point(invert(cam_to_world), transform_point(cam_to_world, p)))

try:
    compose(cam_to_tt, tt_to_world)
except FrameMismatch as exc:
    print("refused:", exc)

# %% [markdown]
# A frame graph resolves a chain of edges and checks that different paths
# agree.

# %%
g = FrameGraph()
g.add(cam_to_tt)
g.add(tt_to_world)
print(g.resolve(WORLD, CAMERA).matrix)
