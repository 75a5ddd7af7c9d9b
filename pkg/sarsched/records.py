# coding=utf-8
"""
Per-episode logs and their tabular exports.

EpisodeLog keeps one row per slot, including the forced sensing slot 1, and
derives the per-frame table and the episode aggregates from it.

"""

import dataclasses
from typing import Dict, List

import numpy as np
import pandas as pd

from .env import Action, EnvState, SlotOutcome
from .exceptions import ContractViolation
from .params import ScenarioConfig
from .sar import scr_db, uncertainty_radius

TRACE_COLUMNS = [
    "n", "frame_i", "action", "alpha", "R_u", "R_e_worst", "R",
    "r_e_m", "scr_db_frozen", "eve_speed_mps", "reward",
]

FRAME_COLUMNS = ["frame_i", "L_i", "C_i", "s2c_ratio", "mean_speed"]


@dataclasses.dataclass
class EpisodeLog:
    cfg: ScenarioConfig
    track_kind: str
    rows: List[Dict[str, float]] = dataclasses.field(default_factory=list)

    @classmethod
    def begin(cls, state: EnvState) -> "EpisodeLog":
        """Log whose first row is the sensing slot applied by reset()."""
        log = cls(cfg=state.cfg, track_kind=state.track.kind)
        log.rows.append({
            "n": 1,
            "frame_i": state.i,
            "action": int(Action.SENSE),
            "alpha": 0.0,
            "R_u": 0.0,
            "R_e_worst": 0.0,
            "R": 0.0,
            "r_e_m": uncertainty_radius(state.cfg, state.u, 1),
            "scr_db_frozen": scr_db(state.cfg, state.L_frozen),
            "eve_speed_mps": state.track.speed(1),
            "reward": 0.0,
            "scr_penalty": False,
        })
        return log

    def record(self, state: EnvState, outcome: SlotOutcome) -> None:
        """Append the slot just processed; `state` is the state after the step."""
        self.rows.append({
            "n": outcome.n,
            "frame_i": state.i,
            "action": int(outcome.action),
            "alpha": outcome.alpha,
            "R_u": outcome.R_u,
            "R_e_worst": outcome.R_e_worst,
            "R": outcome.R,
            "r_e_m": outcome.r_e,
            "scr_db_frozen": scr_db(self.cfg, state.L_frozen),
            "eve_speed_mps": state.track.speed(outcome.n),
            "reward": outcome.reward,
            "scr_penalty": outcome.scr_penalty_fired,
        })

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def complete(self) -> bool:
        return len(self.rows) == self.cfg.n_slots

    @property
    def actions(self) -> np.ndarray:
        return np.array([row["action"] for row in self.rows], dtype=int)

    def _column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    def trace(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=TRACE_COLUMNS)

    def frames(self) -> pd.DataFrame:
        """Sensing length, communication length and sensing-to-communication ratio per frame."""
        trace = self.trace()
        grouped = trace.groupby("frame_i", sort=True)
        frames = pd.DataFrame({
            "L_i": grouped["action"].apply(lambda a: int((a == Action.SENSE).sum())),
            "C_i": grouped["action"].apply(lambda a: int((a == Action.COMMUNICATE).sum())),
            "mean_speed": grouped["eve_speed_mps"].mean(),
        }).reset_index()
        frames["s2c_ratio"] = frames["L_i"] / frames["C_i"].where(frames["C_i"] > 0)
        return frames[FRAME_COLUMNS]

    @property
    def total_reward(self) -> float:
        return float(self._column("reward").sum())

    @property
    def mean_secrecy(self) -> float:
        """Average worst-case secrecy rate over the horizon (sensing slots count as zero)."""
        return float(self._column("R").sum() / self.cfg.n_slots)

    @property
    def mean_user_rate(self) -> float:
        return float(self._column("R_u").sum() / self.cfg.n_slots)

    @property
    def scr_violations(self) -> int:
        return int(sum(bool(row["scr_penalty"]) for row in self.rows))

    @property
    def r_min_satisfied(self) -> bool:
        return self.mean_user_rate >= self.cfg.r_min

    @property
    def scr_compliant(self) -> bool:
        """Every communication slot that carried data followed an SCR-feasible aperture."""
        floor_db = 10.0 * np.log10(self.cfg.scr_min)
        return all(row["scr_db_frozen"] >= floor_db - 1e-9
                   for row in self.rows
                   if row["action"] == Action.COMMUNICATE and row["R_u"] > 0.0)

    def summary(self) -> Dict[str, float]:
        return {
            "track_kind": self.track_kind,
            "n_slots": self.cfg.n_slots,
            "mean_secrecy": self.mean_secrecy,
            "mean_user_rate": self.mean_user_rate,
            "total_reward": self.total_reward,
            "scr_violations": self.scr_violations,
            "scr_compliant": self.scr_compliant,
            "r_min_satisfied": self.r_min_satisfied,
            "frames": int(self.frames().shape[0]),
        }


def aggregate_logs(logs: List[EpisodeLog]) -> Dict[str, float]:
    """Mean and spread of episode metrics over several logs."""
    unfinished = [i for i, log in enumerate(logs) if not log.complete]
    if unfinished:
        raise ContractViolation(f"episodes {unfinished} stop before the horizon")
    secrecy = np.array([log.mean_secrecy for log in logs])
    user = np.array([log.mean_user_rate for log in logs])
    slots = sum(log.cfg.n_slots for log in logs)
    return {
        "episodes": len(logs),
        "mean_secrecy": float(secrecy.mean()),
        "std_secrecy": float(secrecy.std()),
        "mean_user_rate": float(user.mean()),
        "scr_violation_rate": float(sum(log.scr_violations for log in logs) / slots),
        "r_min_satisfied": bool(all(log.r_min_satisfied for log in logs)),
    }
