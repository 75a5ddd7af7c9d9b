# coding=utf-8
"""
ABS orbit geometry and ground-moving eavesdropper trajectories.

All slot indices in the public API are 1-based, as in the scheduling model:
slot n lives at row n - 1 of the position array. Velocities are forward
differences of positions, so a track of N positions has N - 1 velocities and
the final slot has none.

"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import TrackError
from .params import ScenarioConfig

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

# Random tracks are kept inside this multiple of the ROI radius.
CONFINEMENT_FACTOR = 1.1

_REL_TOL = 1e-9
_ABS_TOL = 1e-7


class AbsPose(NamedTuple):
    """ABS position and its local frame in slot n."""
    n: int
    q_a: np.ndarray
    e_perp: np.ndarray
    e_t: np.ndarray
    e_b: np.ndarray


def orbit_phase(cfg: ScenarioConfig, n: int, phase0: Optional[float] = None) -> float:
    phase0 = cfg.phase0 if phase0 is None else phase0
    return phase0 + (n - 1) * cfg.delta_t * cfg.v_a / cfg.r_a


def abs_pose(cfg: ScenarioConfig, n: int, phase0: Optional[float] = None) -> AbsPose:
    """
    Pose of the ABS on its circular orbit in slot n.

    e_perp points from the ABS toward the orbit axis (horizontal), e_t is
    e_perp rotated by +90 degrees (direction of flight) and e_b is vertical.
    """
    if not 1 <= n <= cfg.n_slots:
        raise IndexError(f"slot {n} outside 1..{cfg.n_slots}")
    phi = orbit_phase(cfg, n, phase0)
    cos_phi, sin_phi = math.cos(phi), math.sin(phi)
    return AbsPose(
        n=n,
        q_a=np.array([cfg.r_a * cos_phi, cfg.r_a * sin_phi, cfg.h]),
        e_perp=np.array([-cos_phi, -sin_phi, 0.0]),
        e_t=np.array([-sin_phi, cos_phi, 0.0]),
        e_b=np.array([0.0, 0.0, 1.0]),
    )


@dataclass(frozen=True, eq=False)
class EveTrack:
    """Ground-truth eavesdropper trajectory; positions (N, 3), velocities (N - 1, 3)."""
    positions: np.ndarray
    velocities: np.ndarray
    kind: str
    seed: Optional[int]

    @classmethod
    def from_positions(cls, cfg: ScenarioConfig, positions: np.ndarray, kind: str,
                       seed: Optional[int]) -> "EveTrack":
        positions = np.asarray(positions, dtype=float)
        positions.setflags(write=False)
        velocities = np.diff(positions, axis=0) / cfg.delta_t
        velocities.setflags(write=False)
        return cls(positions=positions, velocities=velocities, kind=kind, seed=seed)

    def __len__(self) -> int:
        return len(self.positions)

    def position(self, n: int) -> np.ndarray:
        if not 1 <= n <= len(self.positions):
            raise IndexError(f"slot {n} outside 1..{len(self.positions)}")
        return self.positions[n - 1]

    def velocity(self, n: int) -> np.ndarray:
        if not 1 <= n <= len(self.velocities):
            raise IndexError(f"slot {n} has no forward-difference velocity")
        return self.velocities[n - 1]

    def speed(self, n: int) -> float:
        """True speed in slot n; the final slot reports the last defined velocity."""
        return float(np.linalg.norm(self.velocities[min(n, len(self.velocities)) - 1]))

    def validate(self, cfg: ScenarioConfig, check_acceleration: bool = True) -> "EveTrack":
        """Check ground altitude, the speed cap and (optionally) the acceleration cap."""
        if self.positions.shape != (cfg.n_slots, 3):
            raise TrackError(f"track has shape {self.positions.shape}, expected ({cfg.n_slots}, 3)")
        if np.any(self.positions[:, 2] != 0.0):
            raise TrackError("eavesdropper must stay on the ground (altitude 0)")
        speeds = np.linalg.norm(self.velocities, axis=1)
        if np.any(speeds > cfg.v_e_max * (1 + _REL_TOL) + _ABS_TOL):
            raise TrackError(f"speed {speeds.max():.6f} m/s exceeds v_e_max={cfg.v_e_max}")
        if check_acceleration and len(self.velocities) > 1:
            accel = np.linalg.norm(np.diff(self.velocities, axis=0), axis=1) / cfg.delta_t
            if np.any(accel > cfg.a_e_max * (1 + _REL_TOL) + _ABS_TOL):
                raise TrackError(f"acceleration {accel.max():.6f} m/s^2 exceeds a_e_max={cfg.a_e_max}")
        return self


def gen_eve_circular(cfg: ScenarioConfig, radius: float, speed: float, seed: int) -> EveTrack:
    """
    Constant-speed circle of the given radius centred on the user.

    The start angle is drawn from the seed. Only the speed cap is enforced: a
    tight circle at high speed needs more centripetal acceleration than
    a_e_max allows.
    """
    if speed < 0 or speed > cfg.v_e_max:
        raise TrackError(f"speed {speed} outside [0, v_e_max={cfg.v_e_max}]")
    if radius <= 0:
        raise TrackError("circle radius must be positive")
    rng = np.random.default_rng(seed)
    psi0 = rng.uniform(0.0, 2.0 * math.pi)
    psi = psi0 + (speed / radius) * cfg.delta_t * np.arange(cfg.n_slots)
    centre = np.asarray(cfg.q_u, dtype=float)
    positions = np.column_stack([
        centre[0] + radius * np.cos(psi),
        centre[1] + radius * np.sin(psi),
        np.zeros(cfg.n_slots),
    ])
    track = EveTrack.from_positions(cfg, positions, "circular", seed)
    return track.validate(cfg, check_acceleration=False)


def gen_eve_linear_oscillating(cfg: ScenarioConfig, heading: float, v_lo: float, v_hi: float,
                               period: float, start: Sequence[float], seed: int) -> EveTrack:
    """
    Straight line with a sinusoidal speed profile between v_lo and v_hi.

    The speed follows the sinusoid through a slew-rate limiter, so the change
    per slot never exceeds a_e_max * delta_t even when the period is short.
    """
    if not 0 <= v_lo <= v_hi <= cfg.v_e_max:
        raise TrackError(f"need 0 <= v_lo <= v_hi <= v_e_max, got v_lo={v_lo}, v_hi={v_hi}")
    if period <= 0:
        raise TrackError("oscillation period must be positive")
    start = np.asarray(start, dtype=float)
    if start.shape != (3,) or start[2] != 0.0:
        raise TrackError("start must be a ground point (x, y, 0)")

    steps = cfg.n_slots - 1
    mid, amp = 0.5 * (v_lo + v_hi), 0.5 * (v_hi - v_lo)
    target = mid + amp * np.sin(2.0 * math.pi * np.arange(steps) / period)
    max_step = cfg.a_e_max * cfg.delta_t
    speeds = np.empty(steps)
    speeds[0] = target[0]
    for k in range(1, steps):
        speeds[k] = speeds[k - 1] + np.clip(target[k] - speeds[k - 1], -max_step, max_step)

    direction = np.array([math.cos(heading), math.sin(heading), 0.0])
    displacements = speeds[:, None] * direction[None, :] * cfg.delta_t
    positions = np.vstack([start, start + np.cumsum(displacements, axis=0)])
    positions[:, 2] = 0.0
    return EveTrack.from_positions(cfg, positions, "linear-oscillating", seed).validate(cfg)


def _disk_sample(rng: np.random.Generator, radius: float) -> np.ndarray:
    r = radius * math.sqrt(rng.uniform())
    angle = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([r * math.cos(angle), r * math.sin(angle)])


def gen_eve_random(cfg: ScenarioConfig, seed: int) -> EveTrack:
    """
    Random-acceleration walk confined to CONFINEMENT_FACTOR * r_r.

    Each slot draws an acceleration uniformly in the disk of radius a_e_max and
    clips the speed to v_e_max. Confinement is kinematic: when the candidate
    step would leave the eavesdropper unable to stop inside the boundary
    (|p| + |v|^2 / (2 a_e_max) > boundary), it brakes at full strength along
    its velocity instead. Braking never increases that stopping reach, so the
    caps stay exact and |p| never exceeds the boundary.
    Braking takes the place of reflecting the heading at the boundary, since an
    instant reflection would exceed the a_e_max cap.
    """
    rng = np.random.default_rng(seed)
    boundary = CONFINEMENT_FACTOR * cfg.r_r
    a_max, dt = cfg.a_e_max, cfg.delta_t

    def stopping_reach(p: np.ndarray, v: np.ndarray) -> float:
        return float(np.linalg.norm(p) + np.dot(v, v) / (2.0 * a_max))

    def clip_speed(v: np.ndarray) -> np.ndarray:
        s = float(np.linalg.norm(v))
        return v * (cfg.v_e_max / s) if s > cfg.v_e_max else v

    p = _disk_sample(rng, cfg.r_r)
    v = clip_speed(_disk_sample(rng, 0.5 * cfg.v_e_max))
    if stopping_reach(p + v * dt, v) > boundary:
        v = np.zeros(2)

    positions = np.zeros((cfg.n_slots, 3))
    positions[0, :2] = p
    p = p + v * dt
    positions[1, :2] = p
    for k in range(2, cfg.n_slots):
        v_candidate = clip_speed(v + _disk_sample(rng, a_max) * dt)
        if stopping_reach(p + v_candidate * dt, v_candidate) <= boundary:
            v = v_candidate
        else:
            s = float(np.linalg.norm(v))
            v = v * (1.0 - a_max * dt / s) if s > a_max * dt else np.zeros(2)
        p = p + v * dt
        positions[k, :2] = p
    return EveTrack.from_positions(cfg, positions, "random", seed).validate(cfg)


def make_track(cfg: ScenarioConfig, kind: str, seed: int, **params) -> EveTrack:
    """Dispatch a scenario spec (generator kind plus its parameters) to a generator."""
    if kind == "circular":
        return gen_eve_circular(cfg, radius=params["radius_m"], speed=params["speed_mps"], seed=seed)
    if kind == "linear-oscillating":
        return gen_eve_linear_oscillating(
            cfg,
            heading=params["heading_rad"],
            v_lo=params["v_lo_mps"],
            v_hi=params["v_hi_mps"],
            period=params["period_slots"],
            start=params["start_m"],
            seed=seed,
        )
    if kind == "random":
        return gen_eve_random(cfg, seed)
    raise TrackError(f"unknown trajectory generator '{kind}'")
