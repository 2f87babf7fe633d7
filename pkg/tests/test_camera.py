import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TABLE1, random_camera_scene
from kinar.camera import (
    CameraIntrinsics,
    PixelPoint,
    apply_distortion,
    back_project_to_plane,
    build_projection,
    distort_normalized,
    intrinsic_matrix,
    project_point,
    project_points,
    undistort,
    undistort_normalized,
)
from kinar.errors import BehindCamera, FrameMismatch, NoConvergence
from kinar.geometry import CAMERA, WORLD, EulerAngles, FramedPoint, RigidTransform, invert

IDENTITY_EXT = RigidTransform.identity(WORLD, CAMERA)


def test_intrinsic_matrix_unit():
    assert np.array_equal(intrinsic_matrix(CameraIntrinsics(1, 1)), np.eye(3))


def test_intrinsic_matrix_table1(table1):
    np.testing.assert_array_equal(
        intrinsic_matrix(table1),
        [[3676.462, 0.263, 645.342], [0, 3676.478, 508.259], [0, 0, 1]],
    )


@given(st.floats(1, 1e4), st.floats(1, 1e4), st.floats(-10, 10), st.floats(0, 639), st.floats(0, 479))
def test_intrinsic_matrix_structure(fx, fy, r, u0, v0):
    k = intrinsic_matrix(CameraIntrinsics(fx, fy, r, u0, v0))
    assert np.all(np.tril(k, -1) == 0)
    assert k[2, 2] == 1


@pytest.mark.parametrize("field,value", [("fx", -1.0), ("fy", 0.0)])
def test_intrinsics_reject_bad_focal(field, value):
    kw = dict(TABLE1)
    kw[field] = value
    with pytest.raises(ValueError, match=f"{field} > 0"):
        CameraIntrinsics(**kw)


def test_intrinsics_notes_flag_table1(table1):
    notes = " ".join(table1.validation_notes())
    assert "u0" in notes and "v0" in notes and "k1" in notes and "k2" in notes
    assert CameraIntrinsics(500, 500, 0, 320, 240).validation_notes() == []


def test_build_projection_identity():
    p = build_projection(CameraIntrinsics(1, 1), IDENTITY_EXT)
    assert np.array_equal(p.m, np.hstack([np.eye(3), np.zeros((3, 1))]))
    assert p.source_frame == WORLD


def test_build_projection_table1_identity(table1):
    p = build_projection(table1, IDENTITY_EXT)
    np.testing.assert_array_equal(p.m[:, :3], intrinsic_matrix(table1))
    np.testing.assert_array_equal(p.m[:, 3], 0)


def test_build_projection_matches_hand_product(table1, rng):
    for _ in range(50):
        e = EulerAngles(*rng.uniform(-np.pi, np.pi, 3) * [1, 0.5, 1])
        t = rng.uniform(-1000, 1000, 3)
        ext = RigidTransform.from_euler(e, t, WORLD, CAMERA)
        a, b, g = e.alpha, e.beta, e.gamma
        ca, sa, cb, sb, cg, sg = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(g), np.sin(g)
        rt = np.array(
            [
                [cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg, t[0]],
                [cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg, t[1]],
                [-sb, sa * cb, ca * cb, t[2]],
            ]
        )
        k = np.array([[table1.fx, table1.skew_r, table1.u0], [0, table1.fy, table1.v0], [0, 0, 1]])
        np.testing.assert_allclose(build_projection(table1, ext).m, k @ rt, rtol=1e-12, atol=1e-12 * 4e6)


def test_build_projection_frame_mismatch(table1):
    with pytest.raises(FrameMismatch):
        build_projection(table1, RigidTransform.identity(CAMERA, WORLD))


def test_project_on_axis_hits_principal_point(table1):
    px = project_point(table1, IDENTITY_EXT, FramedPoint(WORLD, (0, 0, 1000)))
    assert px == PixelPoint(645.342, 508.259)


def test_project_off_axis(table1):
    px = project_point(table1, IDENTITY_EXT, FramedPoint(WORLD, (100, 0, 1000)))
    assert px.u == pytest.approx(3676.462 * 0.1 + 645.342, abs=1e-9)
    assert px.u == pytest.approx(1012.9882, abs=1e-9)
    assert px.v == pytest.approx(508.259, abs=1e-12)


@pytest.mark.parametrize("z", [-10.0, 0.0, 1e-7])
def test_project_behind_camera(table1, z):
    with pytest.raises(BehindCamera):
        project_point(table1, IDENTITY_EXT, FramedPoint(WORLD, (0, 0, z)))


def test_project_point_frame_mismatch(table1):
    with pytest.raises(FrameMismatch):
        project_point(table1, IDENTITY_EXT, FramedPoint(CAMERA, (0, 0, 10)))


def test_projection_matrix_equals_project_point(table1, rng):
    ext, world = random_camera_scene(rng, 10_000)
    p = build_projection(table1, ext)
    uv, _ = project_points(table1, ext, world)
    np.testing.assert_allclose(p.project(world), uv, atol=1e-10 * 1e1, rtol=0)
    for w in world[:20]:
        px = project_point(table1, ext, FramedPoint(WORLD, w))
        np.testing.assert_allclose(p.project(w)[0], px.as_array(), atol=1e-10 * 10)


def test_projection_rank_three(table1, rng):
    ext, _ = random_camera_scene(rng, 1)
    assert np.linalg.matrix_rank(build_projection(table1, ext).m) == 3


@settings(max_examples=200)
@given(
    st.floats(-500, 500), st.floats(-500, 500), st.floats(100, 5000), st.floats(1.0001, 100)
)
def test_projection_scale_invariant_along_ray(x, y, z, lam):
    c = CameraIntrinsics(**TABLE1)
    a = project_point(c, IDENTITY_EXT, FramedPoint(WORLD, (x, y, z)))
    b = project_point(c, IDENTITY_EXT, FramedPoint(WORLD, (lam * x, lam * y, lam * z)))
    assert abs(a.u - b.u) < 1e-9 * max(1, abs(a.u)) and abs(a.v - b.v) < 1e-9 * max(1, abs(a.v))


def test_back_project_inverts_projection(table1, rng):
    ext, world = random_camera_scene(rng, 200)
    uv, _ = project_points(table1, ext, world)
    pose = invert(ext)
    for w, q in zip(world[:50], uv[:50]):
        n = rng.normal(size=3)
        hit = back_project_to_plane(table1, pose, q, w, n)
        np.testing.assert_allclose(hit[0], w, atol=1e-6)


# distortion

def test_distortion_principal_point_unchanged(table1):
    p = PixelPoint(table1.u0, table1.v0)
    assert apply_distortion(table1, p) == p
    assert undistort(table1, p) == p


def test_distortion_zero_coefficients_identity(rng):
    c = CameraIntrinsics(800, 810, 0, 320, 240)
    for u, v in rng.uniform(-200, 800, (20, 2)):
        p = PixelPoint(u, v)
        np.testing.assert_allclose(apply_distortion(c, p).as_array(), p.as_array(), rtol=1e-14)
        np.testing.assert_allclose(undistort(c, p).as_array(), p.as_array(), rtol=1e-14)


def test_distortion_known_value():
    c = CameraIntrinsics(1000, 1000, 0, 500, 400, k1=0.1)
    ideal = PixelPoint(500 + 0.1 * 1000, 400)
    d = apply_distortion(c, ideal)
    assert (d.u - 500) / 1000 == pytest.approx(0.1001, abs=1e-15)
    back = undistort(c, d)
    assert abs((back.u - 500) / 1000 - 0.1) < 1e-10


@settings(max_examples=300)
@given(
    st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5)
)
def test_undistort_roundtrip_property(x, y, k1, k2):
    c = CameraIntrinsics(**{**TABLE1, "k1": k1, "k2": k2})
    ideal = PixelPoint(c.u0 + x * c.fx, c.v0 + y * c.fy)
    back = undistort(c, apply_distortion(c, ideal))
    assert abs(back.u - ideal.u) < 1e-8 and abs(back.v - ideal.v) < 1e-8


def test_undistort_reports_no_convergence():
    # strongly negative k1 folds the radial map; the fixed point diverges
    c = CameraIntrinsics(1000, 1000, 0, 0, 0, k1=-2.0, k2=0.0)
    with pytest.raises(NoConvergence) as exc:
        undistort_normalized(c, np.array([[0.6, 0.6]]))
    assert exc.value.residual > 1e-10


def test_distort_normalized_vectorised():
    c = CameraIntrinsics(1, 1, k1=0.2, k2=0.05)
    xy = np.array([[0.1, 0.2], [0.3, -0.1]])
    r2 = np.sum(xy**2, axis=1, keepdims=True)
    np.testing.assert_allclose(distort_normalized(c, xy), xy * (1 + 0.2 * r2 + 0.05 * r2**2))
