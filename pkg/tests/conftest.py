import numpy as np
import pytest

from kinar import io
from kinar.camera import CameraIntrinsics
from kinar.geometry import CAMERA, WORLD, EulerAngles, RigidTransform

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []

TABLE1 = dict(fx=3676.462, fy=3676.478, skew_r=0.263, u0=645.342, v0=508.259, k1=1.30, k2=1.88)


@pytest.fixture
def table1():
    return CameraIntrinsics(**TABLE1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def paper_scene():
    return io.load_scene(io.paper_scene_path())


def random_rotation(rng):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_transform(rng, from_frame="a", to_frame="b", scale=1000.0):
    return RigidTransform(random_rotation(rng), rng.uniform(-scale, scale, 3), from_frame, to_frame)


def random_camera_scene(rng, n):
    """A random world->camera extrinsic and ``n`` generic world points in front of it."""
    angles = EulerAngles(*rng.uniform(-np.pi, np.pi, 3) * [1, 0.45, 1])
    ext = RigidTransform.from_euler(angles, rng.uniform(-500, 500, 3), WORLD, CAMERA)
    pc = np.column_stack([rng.uniform(-400, 400, n), rng.uniform(-300, 300, n), rng.uniform(1500, 4000, n)])
    world = (pc - ext.translation) @ ext.rotation
    return ext, world


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda x: int(x.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
