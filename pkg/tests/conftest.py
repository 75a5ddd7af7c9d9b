import copy
from pathlib import Path

import numpy as np
import pytest
import yaml

from sarsched.params import ScenarioConfig
from sarsched.sar import UncertaintyState
from sarsched.scenario import abs_pose

PROJECT_ROOT = Path(__file__).resolve().parent.parent
EXPERIMENTS = PROJECT_ROOT / "config" / "experiments"
SCENARIOS = PROJECT_ROOT / "config" / "scenarios"


@pytest.fixture
def cfg() -> ScenarioConfig:
    """Reference system constants (2500 slots)."""
    return ScenarioConfig()


@pytest.fixture
def short_cfg() -> ScenarioConfig:
    return ScenarioConfig(n_slots=40)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def reference_data() -> dict:
    with open(EXPERIMENTS / "reference.yaml", "r", encoding="utf-8") as fh:
        return yaml.safe_load(fh)


@pytest.fixture
def tiny_experiment(reference_data) -> dict:
    """Experiment mapping small enough for end-to-end CLI runs."""
    data = copy.deepcopy(reference_data)
    data["scenario"]["n_slots"] = 20
    data["agent"]["hidden_sizes"] = [8, 8]
    data["agent"]["minibatch"] = 16
    data["training"] = {"iterations": 2, "episodes_per_iteration": 1, "eval_interval": 1}
    data["evaluation"]["speeds_mps"] = [6.0]
    data["baselines"] = {
        "aperture_range": [3, 5],
        "frames_range": [1, 3],
        "random_aperture_max": 6,
        "random_comm_max": 8,
        "random_trials": 3,
    }
    data["sweep"]["speeds_mps"] = [0.0, 14.0]
    return data


@pytest.fixture
def tiny_experiment_file(tmp_path, tiny_experiment) -> Path:
    path = tmp_path / "tiny.yaml"
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(tiny_experiment, fh)
    return path


def random_geometry(cfg: ScenarioConfig, rng: np.random.Generator, max_radius: float = 30.0):
    """A random slot pose, eavesdropper estimate inside the ROI and uncertainty radius."""
    n = int(rng.integers(2, cfg.n_slots + 1))
    angle = rng.uniform(0.0, 2.0 * np.pi)
    dist = cfg.r_r * np.sqrt(rng.uniform())
    center = np.array([dist * np.cos(angle), dist * np.sin(angle), 0.0])
    v_est = np.append(rng.uniform(-10.0, 10.0, size=2), 0.0)
    u = UncertaintyState(l=n - 1, L=int(rng.integers(3, 20)), center=center, v_est=v_est)
    r_e = float(rng.uniform(0.5, max_radius))
    return abs_pose(cfg, n), u, r_e
