# coding=utf-8
"""
Scenario constants and the YAML experiment schema.

ScenarioConfig holds every physical/system constant in linear SI units, with
the reference system values as defaults. Experiment files carry the same
constants with unit suffixes (dB, dBsm and dBm fields included); they are
validated by ExperimentFile and converted to linear exactly once, in
ScenarioSection.to_config().

"""

import hashlib
import json
import logging
import math
from pathlib import Path
from typing import List, Literal, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .exceptions import ConfigError

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


def db_to_linear(value_db: float) -> float:
    """10^(dB/10); also used for dBsm."""
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


class ScenarioConfig(BaseModel):
    """
    Physical and system constants in linear units.

    Derived quantities (incidence angle, ground-range resolution, SCR per
    sensing slot, communication antenna count) are exposed as properties.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_slots: int = 2500
    delta_t: float = 0.1
    r_r: float = 100.0
    r_a: float = 200.0
    v_a: float = 10.0
    h: float = 100.0
    lambda_r: float = 0.12
    lambda_c: float = 0.12
    b_r: float = 1e9
    b_c: float = 1e8
    sigma_t: float = db_to_linear(5.0)
    sigma_0: float = db_to_linear(-5.0)
    scr_min: float = db_to_linear(10.0)
    m_t: int = 12
    beta_0: float = db_to_linear(-30.0)
    p_com_max: float = 1.0
    sigma_u2: float = dbm_to_watts(-50.0)
    sigma_e2: float = dbm_to_watts(-50.0)
    q_u: Tuple[float, float, float] = (-50.0, -20.0, 0.0)
    v_e_max: float = 28.0
    a_e_max: float = 2.0
    r_min: float = 1.0
    rho_1: float = 0.5
    rho_2: float = 0.5
    eps_alpha: float = 0.01
    eps_theta: float = 0.01
    c: float = 3e8
    phase0: float = 0.0
    velocity_bound_mode: Literal["cap", "max"] = "cap"

    @model_validator(mode="after")
    def _check_invariants(self) -> "ScenarioConfig":
        if not self.r_a > self.r_r > 0:
            raise ValueError("r_a > r_r > 0 is required")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.m_t < 3:
            raise ValueError("m_t must be at least 3 (two sensing antennas plus one communication antenna)")
        if self.n_slots <= 2:
            raise ValueError("n_slots must exceed 2")
        positive = ("delta_t", "v_a", "lambda_r", "lambda_c", "b_r", "b_c", "sigma_t", "sigma_0",
                    "scr_min", "beta_0", "p_com_max", "sigma_u2", "sigma_e2", "v_e_max",
                    "a_e_max", "c")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("r_min", "rho_1", "rho_2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("eps_alpha", "eps_theta"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.q_u[2] != 0:
            raise ValueError("the user is a ground node: q_u altitude must be 0")
        return self

    @property
    def m_c(self) -> int:
        """Communication antennas; two elements are reserved for sensing."""
        return self.m_t - 2

    @property
    def horizon_s(self) -> float:
        return self.n_slots * self.delta_t

    @property
    def eta(self) -> float:
        """Incidence angle atan(r_a / h), in (0, pi/2)."""
        return math.atan(self.r_a / self.h)

    @property
    def delta_r(self) -> float:
        """Ground-range resolution c / (2 B_r sin(eta))."""
        return self.c / (2.0 * self.b_r * math.sin(self.eta))

    @property
    def scr_slope(self) -> float:
        """SCR contributed by one sensing slot (SCR is linear in aperture length)."""
        return (4.0 * self.sigma_t * self.v_a * self.delta_t * self.b_r * math.sin(self.eta)
                / (self.sigma_0 * self.c * self.lambda_r * self.r_a))

    @property
    def min_feasible_aperture(self) -> int:
        """Smallest aperture length L (slots) with SCR(L) >= SCR_min."""
        aperture = max(1, math.ceil(self.scr_min / self.scr_slope - 1e-12))
        while self.scr_slope * aperture < self.scr_min:
            aperture += 1
        return aperture

    def replace(self, **changes) -> "ScenarioConfig":
        """Validated copy with some fields changed."""
        return ScenarioConfig(**{**self.model_dump(), **changes})


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScenarioSection(_Section):
    """The scenario block of an experiment file, in the units the file uses."""
    n_slots: int
    delta_t_s: float
    r_r_m: float
    r_a_m: float
    v_a_mps: float
    h_m: float
    lambda_r_m: float
    lambda_c_m: float
    b_r_hz: float
    b_c_hz: float
    sigma_t_dbsm: float
    sigma_0_db: float
    scr_min_db: float
    m_t: int
    beta_0_db: float
    p_com_max_w: float
    sigma_u2_dbm: float
    sigma_e2_dbm: float
    q_u_m: Tuple[float, float, float]
    v_e_max_mps: float
    a_e_max_mps2: float
    r_min_bps_hz: float
    rho_1: float
    rho_2: float
    eps_alpha: float
    eps_theta_rad: float
    c_mps: float
    phase0_rad: float = 0.0
    velocity_bound_mode: Literal["cap", "max"] = "cap"

    def to_config(self) -> ScenarioConfig:
        return ScenarioConfig(
            n_slots=self.n_slots,
            delta_t=self.delta_t_s,
            r_r=self.r_r_m,
            r_a=self.r_a_m,
            v_a=self.v_a_mps,
            h=self.h_m,
            lambda_r=self.lambda_r_m,
            lambda_c=self.lambda_c_m,
            b_r=self.b_r_hz,
            b_c=self.b_c_hz,
            sigma_t=db_to_linear(self.sigma_t_dbsm),
            sigma_0=db_to_linear(self.sigma_0_db),
            scr_min=db_to_linear(self.scr_min_db),
            m_t=self.m_t,
            beta_0=db_to_linear(self.beta_0_db),
            p_com_max=self.p_com_max_w,
            sigma_u2=dbm_to_watts(self.sigma_u2_dbm),
            sigma_e2=dbm_to_watts(self.sigma_e2_dbm),
            q_u=self.q_u_m,
            v_e_max=self.v_e_max_mps,
            a_e_max=self.a_e_max_mps2,
            r_min=self.r_min_bps_hz,
            rho_1=self.rho_1,
            rho_2=self.rho_2,
            eps_alpha=self.eps_alpha,
            eps_theta=self.eps_theta_rad,
            c=self.c_mps,
            phase0=self.phase0_rad,
            velocity_bound_mode=self.velocity_bound_mode,
        )


class AgentSection(_Section):
    hidden_sizes: List[int] = Field(default_factory=lambda: [64, 64])
    gamma: float = Field(0.99, ge=0.0, lt=1.0)
    gae_lambda: float = Field(0.95, ge=0.0, le=1.0)
    clip: float = Field(0.2, ge=0.0)
    lr: float = Field(3e-4, ge=0.0)
    epochs: int = Field(4, ge=1)
    minibatch: int = Field(256, ge=1)
    ent_coef: float = 0.01
    vf_coef: float = 0.5
    obs_norm: bool = False


class TrainingSection(_Section):
    iterations: int = Field(200, ge=0)
    episodes_per_iteration: int = Field(8, ge=1)
    eval_interval: int = Field(10, ge=1)


class EvaluationSection(_Section):
    """Held-out circular tracks around the user used for checkpoint selection."""
    radius_m: float = Field(55.0, gt=0.0)
    speeds_mps: List[float] = Field(default_factory=lambda: [6.0, 10.0, 14.0])
    episodes_per_speed: int = Field(1, ge=1)
    greedy: bool = True


class BaselinesSection(_Section):
    aperture_range: Tuple[int, int] = (3, 40)
    frames_range: Tuple[int, int] = (1, 60)
    random_aperture_max: int = Field(40, ge=1)
    random_comm_max: int = Field(100, ge=1)
    random_trials: int = Field(1000, ge=1)


class SweepSection(_Section):
    radius_m: float = Field(55.0, gt=0.0)
    speeds_mps: List[float] = Field(default_factory=lambda: [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0])
    episodes_per_speed: int = Field(1, ge=1)


class ExperimentFile(_Section):
    """Top-level layout of config/experiments/*.yaml; every section is required."""
    scenario: ScenarioSection
    agent: AgentSection
    training: TrainingSection
    evaluation: EvaluationSection
    baselines: BaselinesSection
    sweep: SweepSection

    @property
    def scenario_config(self) -> ScenarioConfig:
        return self.scenario.to_config()


def _raise_config_error(source: str, err: ValidationError, prefix: Tuple[str, ...] = ()) -> None:
    fields = []
    lines = []
    for item in err.errors():
        path = ".".join(str(part) for part in prefix + tuple(item["loc"]))
        fields.append(path)
        lines.append(f"{path}: {item['msg']}")
    raise ConfigError(f"Invalid config {source}:\n  " + "\n  ".join(lines), fields) from None


def parse_experiment(data: object, source: str = "<memory>") -> ExperimentFile:
    """Validate an already-parsed experiment mapping."""
    if not isinstance(data, dict):
        raise ConfigError(f"Invalid config {source}: top level must be a mapping")
    try:
        experiment = ExperimentFile.model_validate(data)
    except ValidationError as err:
        _raise_config_error(source, err)
    # Physical invariants are checked when converting to linear units.
    try:
        experiment.scenario_config
    except ValidationError as err:
        _raise_config_error(source, err, prefix=("scenario",))
    return experiment


def load_experiment(path: Union[str, Path]) -> ExperimentFile:
    """Read and validate an experiment YAML file."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse config {path}: {e}") from e
    experiment = parse_experiment(data, str(path))
    log.info("Loaded experiment config %s (hash %s)", path, config_hash(experiment)[:12])
    return experiment


def config_hash(experiment: BaseModel) -> str:
    """SHA-256 of the canonical JSON dump (sorted keys)."""
    canonical = json.dumps(experiment.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
