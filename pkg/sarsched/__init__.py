# coding=utf-8
"""Export only the names below when you import sarsched"""

from .params import ScenarioConfig, ExperimentFile
from .params import load_experiment, parse_experiment, config_hash

from .scenario import AbsPose, EveTrack, abs_pose, make_track
from .scenario import gen_eve_circular, gen_eve_linear_oscillating, gen_eve_random

from .sar import UncertaintyState, sar_derived, azimuth_resolution, scr, scr_db
from .sar import velocity_upper_bound, uncertainty_radius, in_region

from .channel import ChannelVec, steering, azimuth, channel

from .secrecy import TxDesign, RobustResult, tx_design, user_rate, eve_rate_at
from .secrecy import robust_power_allocation, worst_case_secrecy, secrecy_at_alpha

from .env import Action, EnvState, Observation, SlotOutcome, SchedulingGymEnv
from .env import reset, step, action_mask, reconstruct_schedule, slot_counters

from .records import EpisodeLog

from .agent import PolicyParams, RolloutBatch, act, gae, ppo_update, train
from .agent import evaluate_policy

from .checkpoint import save_checkpoint, load_checkpoint

from .baselines import evaluate_schedule, equal_aperture, equal_aperture_grid_search
from .baselines import random_allocation, disk_gap_profile

from .exceptions import ConfigError, TrackError, DomainError, GeometryError
from .exceptions import ScheduleError, InfeasibleScheduleError, ContractViolation
from .exceptions import CheckpointError, NonFiniteError
