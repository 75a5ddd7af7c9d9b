import math

import numpy as np
import pytest

from sarsched.channel import azimuth, channel, channel_from_polar, steering, steering_matrix
from sarsched.exceptions import DomainError
from sarsched.scenario import abs_pose


def test_steering_broadside_is_all_ones(cfg):
    np.testing.assert_allclose(steering(cfg, 0.0), np.ones(cfg.m_c))


def test_steering_endfire_alternates(cfg):
    expected = np.array([(-1.0) ** k for k in range(cfg.m_c)])
    np.testing.assert_allclose(steering(cfg, math.pi / 2), expected, atol=1e-12)


def test_steering_unit_modulus(cfg):
    a = steering(cfg, 0.7)
    np.testing.assert_allclose(np.abs(a), 1.0)
    assert np.linalg.norm(a) ** 2 == pytest.approx(cfg.m_c)


def test_steering_matrix_matches_rows(cfg):
    thetas = np.array([-1.2, 0.0, 0.3, math.pi])
    matrix = steering_matrix(cfg, thetas)
    assert matrix.shape == (4, cfg.m_c)
    for row, theta in zip(matrix, thetas):
        np.testing.assert_allclose(row, steering(cfg, theta))


def test_azimuth_of_user_at_first_slot(cfg):
    pose = abs_pose(cfg, 1)
    assert azimuth(cfg, pose, np.array(cfg.q_u)) == pytest.approx(math.atan2(-20.0, 250.0))
    assert azimuth(cfg, pose, np.zeros(3)) == pytest.approx(0.0)
    assert azimuth(cfg, pose, np.array([200.0, 50.0, 0.0])) == pytest.approx(math.pi / 2)


def test_user_channel_first_slot(cfg):
    pose = abs_pose(cfg, 1)
    h = channel(cfg, pose, np.array(cfg.q_u))
    assert np.linalg.norm(pose.q_a - np.array(cfg.q_u)) == pytest.approx(270.0)
    assert h.norm ** 2 == pytest.approx(cfg.m_c * cfg.beta_0 / 270.0 ** 2, rel=1e-12)
    assert h.at_slot == 1
    np.testing.assert_array_equal(h.to_point, np.array(cfg.q_u))


def test_channel_scales_inversely_with_distance(cfg):
    pose = abs_pose(cfg, 1)
    near = channel(cfg, pose, np.array([100.0, 0.0, 0.0]))
    direction = np.array([100.0, 0.0, 0.0]) - pose.q_a
    far = channel(cfg, pose, pose.q_a + 2.0 * direction)
    np.testing.assert_allclose(far.entries, near.entries / 2.0)


def test_polar_channel_matches_cartesian(cfg):
    pose = abs_pose(cfg, 300)
    q = np.array([30.0, -40.0, 0.0])
    h = channel(cfg, pose, q)
    d = float(np.linalg.norm(q - pose.q_a))
    polar = channel_from_polar(cfg, azimuth(cfg, pose, q), d, 300)
    np.testing.assert_allclose(polar.entries, h.entries)
    assert polar.to_point is None


def test_coincident_point_rejected(cfg):
    pose = abs_pose(cfg, 5)
    with pytest.raises(DomainError):
        channel(cfg, pose, pose.q_a.copy())
    with pytest.raises(DomainError):
        azimuth(cfg, pose, pose.q_a.copy())
