import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_transform
from kinar.camera import CameraIntrinsics, intrinsic_matrix
from kinar.errors import BehindCamera, EmptyInput
from kinar.geometry import BASE, CAMERA, TURNTABLE, WORLD, EulerAngles, FramedPoint, RigidTransform, invert
from kinar.rig_sim import (
    EncoderModel,
    NoiseSpec,
    RigState,
    TrackGeometry,
    TrackingSample,
    arclength_to_counts,
    camera_pose,
    encoder_to_arclength,
    overlay_pixel,
    rms_error,
    rms_percent,
    run_static_experiment,
    run_tracking_experiment,
    simulate_trajectory,
    track_pose_at,
    track_position,
    turntable_transform,
    window_indices,
)

TRACK = TrackGeometry()
ENC = EncoderModel()
IDENTITY_MCR = RigidTransform.identity(CAMERA, TURNTABLE)
LEVEL = EulerAngles(0.0, 0.0, 0.0)


@pytest.fixture(scope="module")
def nadir_scene(paper_scene):
    """Bundled scene with an identity hand-eye transform: camera looks straight down."""
    return dataclasses.replace(paper_scene, m_cr_matrix=tuple(map(tuple, np.eye(4))))


# encoder

def test_encoder_examples():
    assert encoder_to_arclength(ENC, 0) == 0.0
    assert encoder_to_arclength(ENC, 1000) == 200.0
    assert ENC.pulse_length == pytest.approx(0.2)


def test_encoder_validation():
    with pytest.raises(ValueError):
        EncoderModel(0, 200)
    with pytest.raises(ValueError):
        EncoderModel(1000, -1)


@given(st.floats(0, 1e6))
def test_arclength_quantization_within_one_pulse(s):
    back = encoder_to_arclength(ENC, arclength_to_counts(ENC, s))
    assert back <= s + 1e-9
    assert s - back < ENC.pulse_length + 1e-9


@given(st.integers(0, 10**7))
def test_counts_roundtrip_within_one_pulse(n):
    assert abs(arclength_to_counts(ENC, encoder_to_arclength(ENC, n)) - n) <= 1


# track

def test_track_validation():
    with pytest.raises(ValueError):
        TrackGeometry(corner_radius=0)
    with pytest.raises(ValueError):
        TrackGeometry(width=1500, corner_radius=1000)
    with pytest.raises(ValueError):
        TrackGeometry(heading="spiral")


def test_track_start():
    pos, heading = track_position(TRACK, 0.0)
    np.testing.assert_array_equal(pos, [1000.0, 0.0, 4000.0])
    assert heading == 0.0
    pose = track_pose_at(TRACK, 0.0)
    np.testing.assert_array_equal(pose.rotation[:, 0], [1, 0, 0])
    np.testing.assert_array_equal(pose.rotation[:, 2], [0, 0, -1])
    assert (pose.from_frame, pose.to_frame) == (BASE, WORLD)


def test_track_perimeter():
    want = 2 * 4000 + 2 * 1000 + 2 * np.pi * 1000
    assert TRACK.perimeter == pytest.approx(want, abs=1e-9)
    assert sum(seg[2] for seg in TRACK.segments()) == pytest.approx(want, abs=1e-9)


def test_track_polyline_length_matches_perimeter():
    def polyline(n):
        s = np.linspace(0, TRACK.perimeter, n + 1)
        pts = np.array([track_position(TRACK, x)[0] for x in s[:-1]] + [track_position(TRACK, 0.0)[0]])
        return np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1))

    coarse, fine = polyline(10_000), polyline(20_000)
    # chords undershoot arcs by O(h^2); Richardson removes that term
    assert (4 * fine - coarse) / 3 == pytest.approx(TRACK.perimeter, abs=1e-6)


@pytest.mark.parametrize("shift", [0.0, 123.4, 5000.0])
def test_track_closure(shift):
    a = track_pose_at(TRACK, shift)
    b = track_pose_at(TRACK, shift + TRACK.perimeter)
    np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-9)


def test_track_joint_continuity():
    for _, start, _, _, _ in TRACK.segments():
        for s in (start, start + TRACK.perimeter if start == 0 else start):
            lo, hlo = track_position(TRACK, s - 1e-6)
            hi, hhi = track_position(TRACK, s + 1e-6)
            assert np.linalg.norm(hi - lo) <= 1e-5
            assert abs(np.angle(np.exp(1j * (hhi - hlo)))) <= 1e-8


def test_track_corner_geometry():
    # end of the first corner: (length - r, 0) + r(1, 1), heading +Y
    s = TRACK.straight_x + 0.5 * np.pi * TRACK.corner_radius
    pos, heading = track_position(TRACK, s)
    np.testing.assert_allclose(pos, [6000.0, 1000.0, 4000.0], atol=1e-9)
    assert heading == pytest.approx(np.pi / 2)


def test_track_fixed_heading():
    g = TrackGeometry(heading="fixed")
    pose = track_pose_at(g, g.straight_x + 100.0)
    np.testing.assert_allclose(pose.rotation, np.diag([1.0, -1.0, -1.0]), atol=1e-15)


def test_track_stays_in_bounding_box():
    for s in np.linspace(0, TRACK.perimeter, 997):
        x, y, z = track_position(TRACK, s)[0]
        assert -1e-9 <= x <= 6000 + 1e-9 and -1e-9 <= y <= 3000 + 1e-9 and z == 4000


# camera pose

def test_camera_pose_identity_chain():
    pose = camera_pose(TRACK, ENC, IDENTITY_MCR, RigState(0, LEVEL))
    base = track_pose_at(TRACK, 0.0)
    np.testing.assert_array_equal(pose.matrix, base.matrix)
    assert (pose.from_frame, pose.to_frame) == (CAMERA, WORLD)


def test_camera_pose_with_hand_eye(paper_scene):
    pose = camera_pose(TRACK, ENC, paper_scene.m_cr, RigState(0, LEVEL))
    base = track_pose_at(TRACK, 0.0)
    offset = invert(base).apply(pose.translation)
    np.testing.assert_allclose(offset, [50.843, 47.094, 76.177], atol=1e-9)


def test_camera_pose_chain_consistency(rng):
    for _ in range(100):
        m = random_transform(rng, CAMERA, TURNTABLE, scale=100)
        state = RigState(int(rng.integers(0, 100_000)), EulerAngles(*rng.uniform(-0.8, 0.8, 2), 0.0))
        pose = camera_pose(TRACK, ENC, m, state, start=250.0)
        s = 250.0 + encoder_to_arclength(ENC, state.encoder_counts)
        base = track_pose_at(TRACK, s)
        tt = turntable_transform(state.turntable)
        for pc in rng.uniform(-3000, 3000, (5, 3)):
            step = base.apply(tt.apply(m.apply(pc)))
            np.testing.assert_allclose(pose.apply(pc), step, atol=1e-10 * 1e1)


def test_turntable_ignores_yaw():
    a = turntable_transform(EulerAngles(0.1, 0.2, 0.0))
    b = turntable_transform(EulerAngles(0.1, 0.2, 1.3))
    assert a == b


# overlay

def test_overlay_on_axis_principal_point(table1):
    pose = camera_pose(TRACK, ENC, IDENTITY_MCR, RigState(0, LEVEL))
    on_axis = pose.apply([0.0, 0.0, 2500.0])
    px = overlay_pixel(table1, pose, FramedPoint(WORLD, on_axis))
    assert px.u == pytest.approx(table1.u0, abs=1e-9)
    assert px.v == pytest.approx(table1.v0, abs=1e-9)


def test_overlay_300mm_offset_matches_direct_projection(paper_scene):
    c = paper_scene.intrinsics
    pose = camera_pose(TRACK, ENC, paper_scene.m_cr, RigState(1500, LEVEL))
    anchor = paper_scene.workpiece_pose.translation + [300.0, 0.0, 0.0]
    ext = invert(pose)
    h = intrinsic_matrix(c) @ np.hstack([ext.rotation, ext.translation[:, None]]) @ np.append(anchor, 1.0)
    px = overlay_pixel(c, pose, FramedPoint(WORLD, anchor))
    np.testing.assert_allclose(px.as_array(), h[:2] / h[2], atol=1e-9)
    # either direction of the pose is accepted
    assert overlay_pixel(c, ext, FramedPoint(WORLD, anchor)) == px


def test_overlay_shifts_against_camera_motion(table1, rng):
    for _ in range(50):
        pose = camera_pose(TRACK, ENC, IDENTITY_MCR, RigState(int(rng.integers(0, 20_000)), LEVEL))
        anchor = FramedPoint(WORLD, pose.apply(rng.uniform([-300, -300, 2000], [300, 300, 4000])))
        step = 5.0 * pose.rotation[:, 0]
        moved = RigidTransform(pose.rotation, pose.translation + step, CAMERA, WORLD)
        assert overlay_pixel(table1, moved, anchor).u < overlay_pixel(table1, pose, anchor).u


def test_overlay_behind_camera(table1):
    pose = camera_pose(TRACK, ENC, IDENTITY_MCR, RigState(0, LEVEL))
    with pytest.raises(BehindCamera):
        overlay_pixel(table1, pose, FramedPoint(WORLD, [1000.0, 0.0, 5000.0]))


def test_simulate_trajectory(paper_scene):
    states = [RigState(k * 500, LEVEL, 0.1 * k) for k in range(5)]
    out = simulate_trajectory(paper_scene, states)
    assert len(out) == 5
    assert all(px is not None for _, _, px in out)


# static experiment

def test_static_zero_noise_exact(paper_scene):
    rows = run_static_experiment(paper_scene, [0.0, 300.0, 1500.0], 30, NoiseSpec())
    assert [r.mean_mm for r in rows] == [0.0, 300.0, 1500.0]
    assert [r.std_mm for r in rows] == [0.0, 0.0, 0.0]
    assert [r.failed for r in rows] == [0, 0, 0]
    assert [r.label for r in rows] == ["initial point", "first point", "second point"]


def test_static_requires_two_trials(paper_scene):
    with pytest.raises(ValueError):
        run_static_experiment(paper_scene, [0.0], 1, NoiseSpec())


def analytic_pixel_std(c: CameraIntrinsics, sigma, depth):
    # x = (u - u0 - r (v - v0) / fy) / fx on a fronto-parallel plane; two independent readings
    per_point = sigma * depth * np.sqrt(1 / c.fx**2 + (c.skew_r / (c.fx * c.fy)) ** 2)
    return np.sqrt(2) * per_point


def test_static_pixel_noise_std(nadir_scene):
    sigma = 1.0
    depth = nadir_scene.track.height - nadir_scene.anchor_world()[2]
    want = analytic_pixel_std(nadir_scene.intrinsics, sigma, depth)
    big = run_static_experiment(nadir_scene, [300.0], 100_000, NoiseSpec(False, 0.0, sigma, 9))[0]
    assert big.std_mm == pytest.approx(want, rel=0.01)
    rows = run_static_experiment(nadir_scene, [0.0, 300.0, 1500.0], 30, NoiseSpec(False, 0.0, sigma, nadir_scene.noise.seed))
    assert all(0.7 * want <= r.std_mm <= 1.3 * want for r in rows)
    # a 30-trial std leaves the band with probability ~2%, so check the rate too
    many = run_static_experiment(nadir_scene, np.arange(200.0), 30, NoiseSpec(False, 0.0, sigma, 1))
    inside = np.mean([0.7 * want <= r.std_mm <= 1.3 * want for r in many])
    assert inside >= 0.95


def test_static_deterministic(paper_scene):
    noise = NoiseSpec(True, 1e-4, 1.0, 123)
    a = run_static_experiment(paper_scene, [0.0, 300.0], 30, noise)
    b = run_static_experiment(paper_scene, [0.0, 300.0], 30, noise)
    assert a == b


# tracking

def test_tracking_zero_noise(paper_scene):
    res = run_tracking_experiment(paper_scene, 100.0, 15.0, 0.1, NoiseSpec())
    assert len(res.samples) == 150
    assert all(s.error == 0.0 for s in res.samples)
    assert res.rms_mm == 0.0


def test_tracking_quantization_bound(paper_scene):
    # 97.3 mm/s: per-step travel is not a whole number of 0.2 mm pulses
    res = run_tracking_experiment(paper_scene, 97.3, 15.0, 0.1, NoiseSpec(quantization=True))
    errors = np.array([s.error for s in res.samples])
    assert np.max(np.abs(errors)) <= ENC.pulse_length + 1e-9
    assert np.max(np.abs(errors)) > 0.5 * ENC.pulse_length
    # the lag per sample is the truncated part of the travel
    for s in res.samples:
        travel = 97.3 * s.t
        lag = travel - encoder_to_arclength(ENC, arclength_to_counts(ENC, travel))
        assert abs(abs(s.error) - lag) <= 1e-6


def test_tracking_window(paper_scene):
    res = run_tracking_experiment(paper_scene, 100.0, 20.0, 0.1, NoiseSpec(True, 1e-4, 0.5, 1))
    assert len(res.window_indices) == 30
    assert all(100.0 * res.samples[i].t <= 1500.0 + 1e-9 for i in res.window_indices)
    assert res.rms_mm == pytest.approx(rms_error([res.samples[i] for i in res.window_indices]))
    assert res.rms_percent == pytest.approx(100 * res.rms_mm / 1500.0)


def test_tracking_deterministic(paper_scene):
    noise = NoiseSpec(True, 1e-4, 1.0, 77)
    a = run_tracking_experiment(paper_scene, 100.0, 5.0, 0.1, noise)
    b = run_tracking_experiment(paper_scene, 100.0, 5.0, 0.1, noise)
    assert a.samples == b.samples and a.rms_mm == b.rms_mm


def test_tracking_empty_run(paper_scene):
    with pytest.raises(EmptyInput):
        run_tracking_experiment(paper_scene, 100.0, 0.05, 0.1, NoiseSpec())
    with pytest.raises(ValueError):
        run_tracking_experiment(paper_scene, 100.0, 1.0, 0.0, NoiseSpec())


# rms

def test_rms_examples():
    assert rms_error([0.0, 0.0]) == 0.0
    assert rms_error([3.0, 4.0]) == pytest.approx(3.53553, abs=1e-5)
    assert rms_error([TrackingSample(0.1, 0, 3, 3), TrackingSample(0.2, 0, 4, 4)]) == pytest.approx(np.sqrt(12.5))
    assert rms_percent(15.0, 1500.0) == 1.0


def test_rms_empty():
    with pytest.raises(EmptyInput):
        rms_error([])


def test_rms_two_pass_oracle(rng):
    errors = rng.normal(0.3, 2.0, 30)
    total = 0.0
    for e in errors:
        total += e * e
    assert rms_error(errors) == pytest.approx((total / len(errors)) ** 0.5, abs=1e-12)


def test_window_indices_short_run():
    samples = [TrackingSample(0.1 * k, 0, 0, 0) for k in range(1, 11)]
    assert window_indices(samples, 100.0) == tuple(range(10))
