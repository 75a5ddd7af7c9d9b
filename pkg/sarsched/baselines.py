# coding=utf-8
"""
Fixed-schedule benchmarks.

- evaluate_schedule replays any valid action sequence through the environment.
- disk_gap_profile replays a schedule and compares the sector worst case with
  points sampled from the true ground disk in every transmitting slot.
- equal_aperture gives every frame the same aperture length L over I frames;
  equal_aperture_grid_search scans (L, I) and flags the best pair.
- random_allocation draws SCR-feasible apertures and communication runs at
  random and averages over many trials.

"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .env import Action, reconstruct_schedule, reset, step
from .exceptions import InfeasibleScheduleError, ScheduleError
from .params import ScenarioConfig
from .records import EpisodeLog
from .sar import scr, uncertainty_radius
from .scenario import EveTrack, abs_pose
from .secrecy import disk_sampling_gap

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

GRID_COLUMNS = ["L", "I", "feasible", "mean_secrecy", "mean_user_rate", "scr_violations", "winner"]
TRIAL_COLUMNS = ["trial", "seed", "frames", "mean_secrecy", "mean_user_rate", "scr_violations"]
DISK_GAP_COLUMNS = ["n", "r_e_m", "gap"]


def _full_horizon(cfg: ScenarioConfig, actions: Sequence[int]) -> np.ndarray:
    actions = np.asarray(actions, dtype=int)
    if len(actions) != cfg.n_slots:
        raise ScheduleError(f"schedule has {len(actions)} slots, horizon is {cfg.n_slots}")
    reconstruct_schedule(actions)
    return actions


def evaluate_schedule(cfg: ScenarioConfig, actions: Sequence[int], track: EveTrack,
                      phase0: Optional[float] = None) -> EpisodeLog:
    """Replay a full-horizon action sequence (slot 1 included) and log every slot."""
    actions = _full_horizon(cfg, actions)
    state, _ = reset(cfg, track, phase0)
    episode = EpisodeLog.begin(state)
    for action in actions[1:]:
        state, _, outcome = step(state, Action(int(action)))
        episode.record(state, outcome)
    return episode


def disk_gap_profile(cfg: ScenarioConfig, actions: Sequence[int], track: EveTrack, samples: int = 10_000,
                     seed: int = 0, phase0: Optional[float] = None) -> pd.DataFrame:
    """
    Replay a schedule and measure the ground-disk sampling gap in every
    transmitting slot (communication slots that pass the SCR check).
    """
    actions = _full_horizon(cfg, actions)
    rng = np.random.default_rng(seed)
    state, _ = reset(cfg, track, phase0)
    rows = []
    for action in actions[1:]:
        m = state.n + 1
        if action == Action.COMMUNICATE and scr(cfg, state.L_frozen) >= cfg.scr_min:
            r_e = uncertainty_radius(cfg, state.u, m)
            gap = disk_sampling_gap(cfg, abs_pose(cfg, m, state.phase0), state.u, r_e, samples, rng)
            rows.append({"n": m, "r_e_m": r_e, "gap": gap})
        state, _, _ = step(state, Action(int(action)))
    return pd.DataFrame(rows, columns=DISK_GAP_COLUMNS)


def _frame_actions(apertures: Iterable[int], lengths: Iterable[int]) -> np.ndarray:
    parts = []
    for L, T in zip(apertures, lengths):
        parts.append(np.full(L, Action.SENSE, dtype=int))
        parts.append(np.full(T - L, Action.COMMUNICATE, dtype=int))
    return np.concatenate(parts)


def equal_aperture_actions(n_slots: int, L: int, I: int) -> np.ndarray:
    """
    I frames of aperture L. Frame lengths are n_slots // I, the remainder
    going one slot each to the first frames.
    """
    if L < 1 or I < 1:
        raise InfeasibleScheduleError(f"need L >= 1 and I >= 1, got L={L}, I={I}")
    base, extra = divmod(n_slots, I)
    lengths = [base + (1 if k < extra else 0) for k in range(I)]
    if min(lengths) <= L:
        raise InfeasibleScheduleError(f"aperture L={L} does not fit frames of {min(lengths)} slots (I={I})")
    return _frame_actions([L] * I, lengths)


def equal_aperture(cfg: ScenarioConfig, track: EveTrack, L: int, I: int,
                   phase0: Optional[float] = None) -> EpisodeLog:
    return evaluate_schedule(cfg, equal_aperture_actions(cfg.n_slots, L, I), track, phase0)


def _grid_cell(args) -> dict:
    cfg, track, L, I, phase0 = args
    try:
        episode = equal_aperture(cfg, track, L, I, phase0)
    except InfeasibleScheduleError as e:
        log.debug("Skipping grid cell: %s", e)
        return {"L": L, "I": I, "feasible": False, "mean_secrecy": np.nan,
                "mean_user_rate": np.nan, "scr_violations": np.nan}
    return {"L": L, "I": I, "feasible": True, "mean_secrecy": episode.mean_secrecy,
            "mean_user_rate": episode.mean_user_rate, "scr_violations": episode.scr_violations}


def parallel_map(fn: Callable, jobs: List, workers: int) -> List:
    """Ordered map, in a process pool when workers > 1."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


class GridSearchResult(NamedTuple):
    table: pd.DataFrame
    best_L: int
    best_I: int
    best_secrecy: float


def equal_aperture_grid_search(cfg: ScenarioConfig, track: EveTrack, L_values: Sequence[int],
                               I_values: Sequence[int], phase0: Optional[float] = None,
                               workers: int = 1) -> GridSearchResult:
    """Evaluate every (L, I) pair; the feasible pair with the highest mean secrecy wins."""
    jobs = [(cfg, track, int(L), int(I), phase0) for L in L_values for I in I_values]
    table = pd.DataFrame(parallel_map(_grid_cell, jobs, workers))
    feasible = table[table["feasible"]]
    if feasible.empty:
        raise InfeasibleScheduleError("no feasible (L, I) pair in the grid")
    best = feasible["mean_secrecy"].idxmax()
    table["winner"] = False
    table.loc[best, "winner"] = True
    row = table.loc[best]
    log.info("Equal-aperture winner: L=%d, I=%d, mean secrecy %.4f",
             row["L"], row["I"], row["mean_secrecy"])
    return GridSearchResult(table=table[GRID_COLUMNS], best_L=int(row["L"]), best_I=int(row["I"]),
                            best_secrecy=float(row["mean_secrecy"]))


def random_schedule(n_slots: int, min_aperture: int, aperture_max: int, comm_max: int,
                    rng: np.random.Generator) -> np.ndarray:
    """
    Frames with aperture ~ U[min_aperture, aperture_max] and communication run
    ~ U[1, comm_max] until the horizon is used up.

    A leftover too short for another feasible frame extends the previous
    communication run; otherwise the last frame is cut to fit, shortening the
    aperture only as far as it leaves one communication slot.
    """
    if n_slots < min_aperture + 1:
        raise InfeasibleScheduleError(f"horizon of {n_slots} slots cannot hold an aperture of {min_aperture}")
    aperture_max = max(aperture_max, min_aperture)
    apertures, lengths = [], []
    remaining = n_slots
    while remaining > 0:
        if remaining < min_aperture + 1:
            lengths[-1] += remaining
            break
        L = int(rng.integers(min_aperture, aperture_max + 1))
        C = int(rng.integers(1, comm_max + 1))
        if L + C > remaining:
            L = min(L, remaining - 1)
            C = remaining - L
        apertures.append(L)
        lengths.append(L + C)
        remaining -= L + C
    return _frame_actions(apertures, lengths)


def _random_trial(args) -> dict:
    cfg, track, trial, seed_seq, aperture_max, comm_max, phase0 = args
    rng = np.random.default_rng(seed_seq)
    actions = random_schedule(cfg.n_slots, cfg.min_feasible_aperture, aperture_max, comm_max, rng)
    episode = evaluate_schedule(cfg, actions, track, phase0)
    return {
        "trial": trial,
        "seed": int(seed_seq.generate_state(1)[0]),
        "frames": reconstruct_schedule(actions).I,
        "mean_secrecy": episode.mean_secrecy,
        "mean_user_rate": episode.mean_user_rate,
        "scr_violations": episode.scr_violations,
    }


class RandomAllocationResult(NamedTuple):
    trials: pd.DataFrame
    mean_secrecy: float
    std_secrecy: float
    mean_user_rate: float
    scr_violations: int


def random_allocation(cfg: ScenarioConfig, track: EveTrack, seed: int, trials: int,
                      aperture_max: int = 40, comm_max: int = 100, phase0: Optional[float] = None,
                      workers: int = 1) -> RandomAllocationResult:
    """Average of `trials` random SCR-feasible schedules; trial k uses the k-th child seed."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(cfg, track, k, children[k], aperture_max, comm_max, phase0) for k in range(trials)]
    table = pd.DataFrame(parallel_map(_random_trial, jobs, workers), columns=TRIAL_COLUMNS)
    result = RandomAllocationResult(
        trials=table,
        mean_secrecy=float(table["mean_secrecy"].mean()),
        std_secrecy=float(table["mean_secrecy"].std(ddof=0)),
        mean_user_rate=float(table["mean_user_rate"].mean()),
        scr_violations=int(table["scr_violations"].sum()),
    )
    log.info("Random allocation over %d trials: mean secrecy %.4f +/- %.4f",
             trials, result.mean_secrecy, result.std_secrecy)
    return result


def l_grid(bounds: Tuple[int, int], min_aperture: int) -> List[int]:
    lo, hi = bounds
    return list(range(max(lo, min_aperture), hi + 1))
