"""
Desk-scale learning checks: three trained policies against the fixed-schedule
benchmarks on held-out circular tracks around the user.

Everything here trains or grid-searches at N = 250 and is marked slow.
"""

import os

import numpy as np
import pytest

from sarsched.agent import evaluate_policy, evaluation_tracks, train
from sarsched.baselines import equal_aperture_grid_search, l_grid, random_allocation
from sarsched.params import load_experiment
from sarsched.scenario import gen_eve_circular

from conftest import EXPERIMENTS

pytestmark = pytest.mark.slow

SEEDS = (0, 1, 2)
GATING_SPEEDS = (6.0, 10.0, 14.0)
HELD_OUT_SPEEDS = (0.0,) + GATING_SPEEDS
TRACK_SEED = 11
WORKERS = min(4, os.cpu_count() or 1)


@pytest.fixture(scope="module")
def desk():
    return load_experiment(EXPERIMENTS / "desk.yaml")


@pytest.fixture(scope="module")
def held_out(desk):
    """One track per speed, all starting from the same point on the circle."""
    cfg = desk.scenario_config
    return {speed: gen_eve_circular(cfg, desk.evaluation.radius_m, speed, seed=TRACK_SEED)
            for speed in HELD_OUT_SPEEDS}


@pytest.fixture(scope="module")
def policy_logs(desk, held_out):
    cfg = desk.scenario_config
    logs = {}
    for seed in SEEDS:
        selection = evaluation_tracks(cfg, desk.evaluation, seed=100 + seed)
        params = train(cfg, desk.agent, desk.training, seed=seed, eval_tracks=selection).params
        episodes = evaluate_policy(params, cfg, [held_out[s] for s in HELD_OUT_SPEEDS], greedy=True, seed=seed)
        logs[seed] = dict(zip(HELD_OUT_SPEEDS, episodes))
    return logs


@pytest.fixture(scope="module")
def random_means(desk, held_out):
    cfg, b = desk.scenario_config, desk.baselines
    return {speed: random_allocation(cfg, track, seed=k, trials=b.random_trials,
                                     aperture_max=b.random_aperture_max, comm_max=b.random_comm_max,
                                     workers=WORKERS).mean_secrecy
            for k, (speed, track) in enumerate(held_out.items())}


@pytest.fixture(scope="module")
def grid_winners(desk, held_out):
    cfg, b = desk.scenario_config, desk.baselines
    L_values = l_grid(b.aperture_range, cfg.min_feasible_aperture)
    I_values = list(range(b.frames_range[0], b.frames_range[1] + 1))
    return {speed: equal_aperture_grid_search(cfg, held_out[speed], L_values, I_values,
                                              workers=WORKERS).best_secrecy
            for speed in (0.0, 14.0)}


def test_policy_beats_random_allocation_at_every_speed(policy_logs, random_means):
    for seed in SEEDS:
        for speed in GATING_SPEEDS:
            assert policy_logs[seed][speed].mean_secrecy > random_means[speed], (seed, speed)


def test_policy_beats_equal_aperture_at_top_speed_on_most_seeds(policy_logs, grid_winners):
    wins = [policy_logs[seed][14.0].mean_secrecy > grid_winners[14.0] for seed in SEEDS]
    assert sum(wins) >= 2, wins


def test_every_transmitting_frame_meets_scr(policy_logs):
    for seed in SEEDS:
        for speed in GATING_SPEEDS:
            assert policy_logs[seed][speed].scr_compliant, (seed, speed)


def test_user_rate_floor_on_most_seeds(desk, policy_logs):
    r_min = desk.scenario_config.r_min
    averages = [np.mean([policy_logs[seed][s].mean_user_rate for s in GATING_SPEEDS]) for seed in SEEDS]
    assert sum(a >= r_min for a in averages) >= 2, averages


def test_secrecy_falls_with_eavesdropper_speed(policy_logs, random_means, grid_winners):
    ppo = {s: np.mean([policy_logs[seed][s].mean_secrecy for seed in SEEDS]) for s in (0.0, 14.0)}
    for method, scores in (("ppo", ppo), ("random", random_means), ("equal_aperture", grid_winners)):
        assert scores[0.0] >= scores[14.0], method
