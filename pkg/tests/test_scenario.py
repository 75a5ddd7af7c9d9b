import numpy as np
import pytest

from sarsched.exceptions import TrackError
from sarsched.scenario import (CONFINEMENT_FACTOR, EveTrack, abs_pose, gen_eve_circular,
                               gen_eve_linear_oscillating, gen_eve_random, make_track)


def test_abs_pose_first_slot(cfg):
    pose = abs_pose(cfg, 1)
    np.testing.assert_allclose(pose.q_a, [200.0, 0.0, 100.0])
    np.testing.assert_allclose(pose.e_perp, [-1.0, 0.0, 0.0])
    np.testing.assert_allclose(pose.e_t, [0.0, 1.0, 0.0])
    np.testing.assert_allclose(pose.e_b, [0.0, 0.0, 1.0])


def test_abs_pose_stays_on_orbit(cfg):
    for n in (1, 17, 1250, cfg.n_slots):
        pose = abs_pose(cfg, n)
        assert np.hypot(pose.q_a[0], pose.q_a[1]) == pytest.approx(cfg.r_a)
        assert pose.q_a[2] == cfg.h
        assert np.dot(pose.e_perp, pose.e_t) == pytest.approx(0.0, abs=1e-12)


def test_abs_pose_moves_at_orbit_speed(cfg):
    a, b = abs_pose(cfg, 10).q_a, abs_pose(cfg, 11).q_a
    assert np.linalg.norm(b - a) == pytest.approx(cfg.v_a * cfg.delta_t, rel=1e-4)


@pytest.mark.parametrize("n", [1, 100, 1000, 1243])
def test_abs_pose_returns_after_one_orbit(cfg, n):
    # one orbit is 2 pi r_a / (v_a dt) = 1256.6 slots, so slot n + 1257 overshoots by 0.363 slots
    a, b = abs_pose(cfg, n), abs_pose(cfg, n + 1257)
    overshoot = 1257 * cfg.v_a * cfg.delta_t / cfg.r_a - 2.0 * np.pi
    assert np.linalg.norm(b.q_a - a.q_a) == pytest.approx(2.0 * cfg.r_a * np.sin(overshoot / 2.0), rel=1e-9)
    assert np.linalg.norm(b.q_a - a.q_a) == pytest.approx(0.36294, abs=1e-4)
    assert np.dot(a.e_perp, b.e_perp) == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("n", [0, 2501])
def test_abs_pose_out_of_range(cfg, n):
    with pytest.raises(IndexError):
        abs_pose(cfg, n)


def test_circular_track_geometry(cfg):
    track = gen_eve_circular(cfg, radius=55.0, speed=14.0, seed=3)
    offsets = track.positions[:, :2] - np.asarray(cfg.q_u[:2])
    np.testing.assert_allclose(np.linalg.norm(offsets, axis=1), 55.0)
    speeds = np.linalg.norm(track.velocities, axis=1)
    np.testing.assert_allclose(speeds, 14.0, rtol=1e-3)
    assert np.all(track.positions[:, 2] == 0.0)
    assert track.positions.shape == (cfg.n_slots, 3)
    assert track.velocities.shape == (cfg.n_slots - 1, 3)


def test_circular_track_is_seed_deterministic(cfg):
    a = gen_eve_circular(cfg, 55.0, 6.0, seed=1)
    b = gen_eve_circular(cfg, 55.0, 6.0, seed=1)
    c = gen_eve_circular(cfg, 55.0, 6.0, seed=2)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, c.positions)


def test_zero_speed_circle_stands_still(cfg):
    track = gen_eve_circular(cfg, 55.0, 0.0, seed=4)
    assert np.all(track.velocities == 0.0)


def test_circular_rejects_excess_speed(cfg):
    with pytest.raises(TrackError):
        gen_eve_circular(cfg, 55.0, cfg.v_e_max + 1.0, seed=0)


def test_linear_oscillating_respects_caps(cfg):
    track = gen_eve_linear_oscillating(cfg, heading=0.3, v_lo=5.0, v_hi=20.0, period=40.0,
                                       start=[0.0, 0.0, 0.0], seed=0)
    speeds = np.linalg.norm(track.velocities, axis=1)
    accel = np.linalg.norm(np.diff(track.velocities, axis=0), axis=1) / cfg.delta_t
    assert speeds.min() >= 5.0 - 1e-9
    assert speeds.max() <= 20.0 + 1e-9
    assert accel.max() <= cfg.a_e_max + 1e-6
    direction = track.velocities[10] / np.linalg.norm(track.velocities[10])
    np.testing.assert_allclose(direction[:2], [np.cos(0.3), np.sin(0.3)], atol=1e-9)


def test_linear_oscillating_rejects_bad_start(cfg):
    with pytest.raises(TrackError):
        gen_eve_linear_oscillating(cfg, 0.0, 5.0, 20.0, 100.0, start=[0.0, 0.0, 1.0], seed=0)


@pytest.mark.parametrize("seed", range(12))
def test_random_track_respects_caps_and_confinement(cfg, seed):
    track = gen_eve_random(cfg, seed)
    speeds = np.linalg.norm(track.velocities, axis=1)
    accel = np.linalg.norm(np.diff(track.velocities, axis=0), axis=1) / cfg.delta_t
    radii = np.linalg.norm(track.positions[:, :2], axis=1)
    assert speeds.max() <= cfg.v_e_max * (1 + 1e-9)
    assert accel.max() <= cfg.a_e_max * (1 + 1e-9) + 1e-7
    assert radii.max() <= CONFINEMENT_FACTOR * cfg.r_r + 1e-6
    assert np.all(track.positions[:, 2] == 0.0)


def test_random_track_moves(cfg):
    track = gen_eve_random(cfg, 9)
    assert np.linalg.norm(track.velocities, axis=1).mean() > 0.5


def test_validate_flags_speed_violation(short_cfg):
    positions = np.zeros((short_cfg.n_slots, 3))
    positions[:, 0] = np.arange(short_cfg.n_slots) * 5.0  # 50 m/s
    track = EveTrack.from_positions(short_cfg, positions, "synthetic", None)
    with pytest.raises(TrackError):
        track.validate(short_cfg)


def test_track_arrays_are_read_only(short_cfg):
    track = gen_eve_random(short_cfg, 0)
    with pytest.raises(ValueError):
        track.positions[0, 0] = 1.0


def test_track_accessors(short_cfg):
    track = gen_eve_circular(short_cfg, 55.0, 10.0, seed=0)
    np.testing.assert_array_equal(track.position(1), track.positions[0])
    np.testing.assert_array_equal(track.velocity(1), track.velocities[0])
    assert track.speed(short_cfg.n_slots) == pytest.approx(track.speed(short_cfg.n_slots - 1))
    with pytest.raises(IndexError):
        track.velocity(short_cfg.n_slots)


def test_make_track_dispatch(short_cfg):
    circle = make_track(short_cfg, "circular", 1, radius_m=55.0, speed_mps=14.0)
    assert circle.kind == "circular"
    line = make_track(short_cfg, "linear-oscillating", 1, heading_rad=0.0, v_lo_mps=5.0,
                      v_hi_mps=20.0, period_slots=100, start_m=[0.0, 0.0, 0.0])
    assert line.kind == "linear-oscillating"
    assert make_track(short_cfg, "random", 1).kind == "random"
    with pytest.raises(TrackError):
        make_track(short_cfg, "spiral", 1)
