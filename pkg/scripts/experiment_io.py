"""
experiment_io.py

Input/output helpers shared by the CLI subcommands: scenario-spec files,
seed splitting and the writers for CSV, JSON and YAML run artefacts.

Scenario specs are small YAML files naming a trajectory generator, its
parameters and a seed, e.g.

    kind: circular
    seed: 3
    params:
      radius_m: 55.0
      speed_mps: 14.0
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config.logging_config import logger
from sarsched.exceptions import ConfigError, TrackError
from sarsched.params import ExperimentFile, ScenarioConfig, config_hash
from sarsched.sar import sar_derived
from sarsched.scenario import EveTrack, make_track

# Order of the child seeds spawned from --seed; appending keeps earlier streams stable.
SEED_STREAMS = ("train", "eval", "baseline", "sweep", "disk_check")

CSV_FLOAT_FORMAT = "%.12g"


class ScenarioSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["circular", "linear-oscillating", "random"]
    seed: int = 0
    phase0_rad: Optional[float] = None
    params: Dict[str, Any] = Field(default_factory=dict)

    def build(self, cfg: ScenarioConfig) -> EveTrack:
        try:
            return make_track(cfg, self.kind, self.seed, **self.params)
        except KeyError as e:
            raise ConfigError(f"scenario spec for '{self.kind}' is missing parameter {e}", [f"params.{e.args[0]}"]) from None
        except TrackError as e:
            raise ConfigError(f"scenario spec rejected: {e}") from e


def load_scenario_spec(path: Union[str, Path]) -> ScenarioSpec:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Cannot read scenario spec {path}: {e}") from e
    try:
        spec = ScenarioSpec.model_validate(data)
    except ValidationError as err:
        fields = [".".join(str(p) for p in item["loc"]) for item in err.errors()]
        raise ConfigError(f"Invalid scenario spec {path}: {err}", fields) from None
    logger.info(f"Loaded scenario spec {path} ({spec.kind}, seed {spec.seed})")
    return spec


def split_seeds(seed: int) -> Dict[str, int]:
    """One independent integer seed per stream in SEED_STREAMS, derived from a master seed."""
    children = np.random.SeedSequence(seed).spawn(len(SEED_STREAMS))
    return {name: int(child.generate_state(1)[0]) for name, child in zip(SEED_STREAMS, children)}


def run_dir(out: Optional[str], default_root: str, command: str) -> Path:
    path = Path(out) if out else Path(default_root) / command
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {path} ({len(frame)} rows)")
    return path


def write_json(data: Dict[str, Any], path: Path) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    logger.info(f"Wrote {path}")
    return path


def _json_default(value: Any):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return str(value)


def derived_constants(cfg: ScenarioConfig) -> Dict[str, float]:
    """Quantities computed from the scenario section, recorded next to the snapshot."""
    derived = sar_derived(cfg)
    return {
        "eta_deg": math.degrees(derived.eta),
        "delta_r_m": derived.delta_r,
        "scr_slope": derived.scr_slope,
        "min_feasible_aperture": cfg.min_feasible_aperture,
        "m_c": cfg.m_c,
        "horizon_s": cfg.horizon_s,
    }


def write_config_snapshot(experiment: ExperimentFile, out: Path) -> str:
    """config_snapshot.yaml (with the derived constants) and config_hash.txt; returns the hash."""
    digest = config_hash(experiment)
    snapshot = experiment.model_dump(mode="json")
    snapshot["derived"] = derived_constants(experiment.scenario_config)
    with open(out / "config_snapshot.yaml", "w", encoding="utf-8") as fh:
        yaml.safe_dump(snapshot, fh, sort_keys=True)
    (out / "config_hash.txt").write_text(digest + "\n", encoding="utf-8")
    return digest


def parse_speeds(text: Optional[str], default: Sequence[float], v_e_max: float) -> List[float]:
    """Comma-separated speeds; every speed must lie in [0, v_e_max]."""
    speeds = [float(s) for s in text.split(",")] if text else [float(s) for s in default]
    bad = [s for s in speeds if not 0.0 <= s <= v_e_max]
    if bad:
        raise ConfigError(f"speeds {bad} outside [0, v_e_max={v_e_max}]", ["speeds"])
    return speeds
