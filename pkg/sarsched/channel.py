# coding=utf-8
"""
Uniform linear array steering vectors and line-of-sight channels.

Only the M_c = M_t - 2 communication elements take part in the array
response. Element k has phase -k pi sin(theta) (half-wavelength spacing).

"""

from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DomainError
from .params import ScenarioConfig
from .scenario import AbsPose


class ChannelVec(NamedTuple):
    entries: np.ndarray
    to_point: Optional[np.ndarray]
    at_slot: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


def steering(cfg: ScenarioConfig, theta: float) -> np.ndarray:
    k = np.arange(cfg.m_c)
    return np.exp(-1j * np.pi * k * np.sin(theta))


def steering_matrix(cfg: ScenarioConfig, thetas: np.ndarray) -> np.ndarray:
    """Steering vectors for many angles at once, shape (len(thetas), M_c)."""
    thetas = np.asarray(thetas, dtype=float)
    k = np.arange(cfg.m_c)
    return np.exp(-1j * np.pi * np.sin(thetas)[:, None] * k[None, :])


def _offset(pose: AbsPose, q: np.ndarray) -> np.ndarray:
    diff = np.asarray(q, dtype=float) - pose.q_a
    if not np.any(diff):
        raise DomainError("target point coincides with the ABS position")
    return diff


def azimuth(cfg: ScenarioConfig, pose: AbsPose, q: np.ndarray) -> float:
    """Angle of q off the array broadside, measured in the (e_perp, e_t) plane."""
    diff = _offset(pose, q)
    return float(np.arctan2(diff @ pose.e_t, diff @ pose.e_perp))


def channel(cfg: ScenarioConfig, pose: AbsPose, q: np.ndarray) -> ChannelVec:
    """Free-space LoS channel sqrt(beta_0)/d * steering(theta) toward q."""
    diff = _offset(pose, q)
    d = float(np.linalg.norm(diff))
    theta = float(np.arctan2(diff @ pose.e_t, diff @ pose.e_perp))
    entries = np.sqrt(cfg.beta_0) / d * steering(cfg, theta)
    return ChannelVec(entries=entries, to_point=np.asarray(q, dtype=float), at_slot=pose.n)


def channel_from_polar(cfg: ScenarioConfig, theta: float, d: float, at_slot: int) -> ChannelVec:
    """Channel of a candidate that is only known by azimuth and range."""
    return ChannelVec(entries=np.sqrt(cfg.beta_0) / d * steering(cfg, theta), to_point=None, at_slot=at_slot)
