# coding=utf-8
"""
Slot-level scheduling MDP.

Every slot the ABS either senses (extends the current SAR aperture) or
communicates (serves the user with the robust secure transmission). A frame
is one run of sensing slots followed by one run of communication slots.

State conventions:
    - EnvState.n is the last slot that has been processed. reset() applies
      the mandatory sensing action of slot 1, so a fresh episode has n = 1.
    - step() processes slot n + 1; action_mask() describes that slot.
    - The observation always describes the state after slot n.

"""

import dataclasses
import logging
import math
from enum import IntEnum
from typing import Callable, NamedTuple, Optional, Sequence, Tuple, Union

import gymnasium as gym
import numpy as np

from .channel import azimuth
from .exceptions import ContractViolation, ScheduleError, TrackError
from .params import ScenarioConfig
from .sar import UncertaintyState, scr, scr_db, uncertainty_radius
from .scenario import EveTrack, abs_pose
from .secrecy import robust_power_allocation, wrap_angle

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

OBS_DIM = 6


class Action(IntEnum):
    COMMUNICATE = 0
    SENSE = 1


@dataclasses.dataclass(frozen=True, eq=False)
class EnvState:
    cfg: ScenarioConfig
    track: EveTrack
    phase0: float
    seed: Optional[int]
    n: int
    i: int
    l: int
    L_run: int
    L_frozen: int
    u: UncertaintyState
    cum_user_rate: float
    prev_action: Action
    prev_prev_action: Optional[Action]

    @property
    def done(self) -> bool:
        return self.n >= self.cfg.n_slots


class Observation(NamedTuple):
    s1: float
    s2x: float
    s2y: float
    s3: float
    s4: float
    s5: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)


class SlotOutcome(NamedTuple):
    n: int
    action: Action
    reward: float
    R_u: float
    R_e_worst: float
    R: float
    alpha: float
    r_e: float
    scr_penalty_fired: bool
    done: bool


def observe(state: EnvState) -> Observation:
    cfg, u = state.cfg, state.u
    pose_l = abs_pose(cfg, u.l, state.phase0)
    pose_n = abs_pose(cfg, state.n, state.phase0)
    q_u = np.asarray(cfg.q_u, dtype=float)
    theta_e = azimuth(cfg, pose_l, u.center)
    theta_u = azimuth(cfg, pose_n, q_u)
    d_e = float(np.linalg.norm(pose_l.q_a - u.center))
    d_u = float(np.linalg.norm(pose_n.q_a - q_u))
    r_e = uncertainty_radius(cfg, u, state.n)
    return Observation(
        s1=state.L_frozen / cfg.n_slots,
        s2x=float(u.v_est[0]) / cfg.v_e_max,
        s2y=float(u.v_est[1]) / cfg.v_e_max,
        s3=r_e / cfg.r_r,
        s4=abs(float(wrap_angle(theta_e - theta_u))) / math.pi,
        s5=(d_e - d_u) / (2.0 * cfg.r_a),
    )


def _estimate(track: EveTrack, slot: int, aperture: int) -> UncertaintyState:
    return UncertaintyState(l=slot, L=aperture, center=track.position(slot), v_est=track.velocity(slot))


def reset(cfg: ScenarioConfig, track: EveTrack, phase0: Optional[float] = None,
          seed: Optional[int] = None) -> Tuple[EnvState, Observation]:
    """Start an episode; slot 1 is always a sensing slot."""
    if len(track) != cfg.n_slots:
        raise TrackError(f"track has {len(track)} slots, episode needs {cfg.n_slots}")
    state = EnvState(
        cfg=cfg,
        track=track,
        phase0=cfg.phase0 if phase0 is None else phase0,
        seed=seed,
        n=1,
        i=1,
        l=1,
        L_run=1,
        L_frozen=1,
        u=_estimate(track, 1, 1),
        cum_user_rate=0.0,
        prev_action=Action.SENSE,
        prev_prev_action=None,
    )
    return state, observe(state)


def slot_mask(slot: int, n_slots: int) -> Tuple[bool, bool]:
    """(sensing allowed, communication allowed) in the given slot."""
    if slot == 1:
        return True, False
    if slot == n_slots:
        return False, True
    return True, True


def action_mask(state: EnvState) -> Tuple[bool, bool]:
    if state.done:
        return False, False
    return slot_mask(state.n + 1, state.cfg.n_slots)


def mask_array(mask: Tuple[bool, bool]) -> np.ndarray:
    """Mask indexed by Action value."""
    sense_ok, comm_ok = mask
    out = np.zeros(2, dtype=bool)
    out[Action.SENSE] = sense_ok
    out[Action.COMMUNICATE] = comm_ok
    return out


def step(state: EnvState, action: Union[Action, int]) -> Tuple[EnvState, Observation, SlotOutcome]:
    action = Action(int(action))
    if state.done:
        raise ContractViolation("episode already finished")
    if not mask_array(action_mask(state))[action]:
        raise ContractViolation(f"action {action.name} is masked in slot {state.n + 1}")

    cfg, track = state.cfg, state.track
    m = state.n + 1
    done = m == cfg.n_slots

    if action == Action.SENSE:
        if state.prev_action == Action.COMMUNICATE:
            i, run = state.i + 1, 1
        else:
            i, run = state.i, state.L_run + 1
        u = _estimate(track, m, run)
        new_state = dataclasses.replace(
            state, n=m, i=i, l=m, L_run=run, L_frozen=run, u=u,
            prev_action=action, prev_prev_action=state.prev_action,
        )
        outcome = SlotOutcome(n=m, action=action, reward=0.0, R_u=0.0, R_e_worst=0.0, R=0.0,
                              alpha=0.0, r_e=uncertainty_radius(cfg, u, m),
                              scr_penalty_fired=False, done=done)
        return new_state, observe(new_state), outcome

    r_e = uncertainty_radius(cfg, state.u, m)
    if scr(cfg, state.L_frozen) < cfg.scr_min:
        log.debug("slot %d: aperture of %d slots below SCR_min (%.2f dB)", m, state.L_frozen,
                  scr_db(cfg, state.L_frozen))
        cum = state.cum_user_rate
        outcome = SlotOutcome(n=m, action=action, reward=-cfg.rho_2, R_u=0.0, R_e_worst=0.0, R=0.0,
                              alpha=0.0, r_e=r_e, scr_penalty_fired=True, done=done)
    else:
        result = robust_power_allocation(cfg, abs_pose(cfg, m, state.phase0), state.u, r_e)
        cum = state.cum_user_rate + result.user_rate
        reward = result.secrecy_rate - cfg.rho_1 * max(cfg.r_min - cum / m, 0.0)
        outcome = SlotOutcome(n=m, action=action, reward=reward, R_u=result.user_rate,
                              R_e_worst=result.worst_point_eve_rate, R=result.secrecy_rate,
                              alpha=result.alpha_star, r_e=r_e, scr_penalty_fired=False, done=done)

    new_state = dataclasses.replace(
        state, n=m, cum_user_rate=cum, prev_action=action, prev_prev_action=state.prev_action,
    )
    return new_state, observe(new_state), outcome


class Schedule(NamedTuple):
    I: int
    T: Tuple[int, ...]
    L: Tuple[int, ...]
    l: Tuple[int, ...]


def _as_actions(actions: Sequence[int]) -> np.ndarray:
    arr = np.asarray(actions)
    if arr.ndim != 1 or len(arr) < 2:
        raise ScheduleError("an action sequence needs at least two slots")
    if not np.all((arr == Action.SENSE) | (arr == Action.COMMUNICATE)):
        raise ScheduleError("actions must be 0 (communicate) or 1 (sense)")
    return arr.astype(int)


def reconstruct_schedule(actions: Sequence[int]) -> Schedule:
    """
    Recover frames from a per-slot action sequence.

    A new frame starts at every communicate -> sense transition. Slot indices
    in the result are 1-based.
    """
    arr = _as_actions(actions)
    if arr[0] != Action.SENSE or arr[-1] != Action.COMMUNICATE:
        raise ScheduleError("schedule must open with sensing and close with communication")
    starts = np.flatnonzero((arr[1:] == Action.SENSE) & (arr[:-1] == Action.COMMUNICATE)) + 1
    bounds = np.concatenate([[0], starts, [len(arr)]])
    T, L, l = [], [], []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        frame = arr[lo:hi]
        aperture = int(np.argmin(frame == Action.SENSE))
        T.append(int(hi - lo))
        L.append(aperture)
        l.append(int(lo) + aperture)
    return Schedule(I=len(T), T=tuple(T), L=tuple(L), l=tuple(l))


def frame_index(actions: Sequence[int]) -> np.ndarray:
    """Frame of every slot; the first sensing slot of a frame already belongs to it."""
    arr = _as_actions(actions)
    new_frame = np.zeros(len(arr), dtype=int)
    new_frame[1:] = (arr[1:] == Action.SENSE) & (arr[:-1] == Action.COMMUNICATE)
    return 1 + np.cumsum(new_frame)


class SlotCounters(NamedTuple):
    i: np.ndarray
    l: np.ndarray


def slot_counters(actions: Sequence[int]) -> SlotCounters:
    """
    Frame index and last sensing slot through the one-slot-delayed recursions
    i[1] = i[2] = 1, i[n] = i[n-1] + 1{a[n-1] = sense, a[n-2] = communicate}
    and l[1] = 1, l[n] = n a[n] + (1 - a[n]) l[n-1].
    """
    arr = _as_actions(actions)
    N = len(arr)
    i = np.ones(N, dtype=int)
    l = np.ones(N, dtype=int)
    for k in range(2, N):
        i[k] = i[k - 1] + int(arr[k - 1] == Action.SENSE and arr[k - 2] == Action.COMMUNICATE)
    for k in range(1, N):
        l[k] = k + 1 if arr[k] == Action.SENSE else l[k - 1]
    return SlotCounters(i=i, l=l)


TrackSource = Union[EveTrack, Callable[[np.random.Generator], EveTrack]]


class SchedulingGymEnv(gym.Env):
    """
    gymnasium wrapper around reset/step.

    `tracks` is either a fixed EveTrack or a callable drawing a fresh track
    from the environment's generator on every reset. Passing
    options={"track": ...} to reset() overrides both.
    """

    metadata = {"render_modes": []}

    def __init__(self, cfg: ScenarioConfig, tracks: TrackSource, phase0: Optional[float] = None):
        self.cfg = cfg
        self._tracks = tracks
        self._phase0 = phase0
        self.action_space = gym.spaces.Discrete(2)
        self.observation_space = gym.spaces.Box(low=-np.inf, high=np.inf, shape=(OBS_DIM,), dtype=np.float64)
        self.state: Optional[EnvState] = None
        self._episode_seed: Optional[int] = None

    def _next_track(self, options: Optional[dict]) -> EveTrack:
        if options and "track" in options:
            return options["track"]
        if isinstance(self._tracks, EveTrack):
            return self._tracks
        return self._tracks(self.np_random)

    def action_masks(self) -> np.ndarray:
        return mask_array(action_mask(self.state))

    def reset(self, *, seed: Optional[int] = None, options: Optional[dict] = None):
        super().reset(seed=seed)
        if seed is not None:
            self._episode_seed = seed
        self.state, obs = reset(self.cfg, self._next_track(options), self._phase0, self._episode_seed)
        return obs.as_array(), {"action_mask": self.action_masks()}

    def step(self, action):
        if self.state is None:
            raise ContractViolation("reset() must be called before step()")
        self.state, obs, outcome = step(self.state, action)
        info = {"outcome": outcome, "action_mask": self.action_masks()}
        return obs.as_array(), float(outcome.reward), outcome.done, False, info
