#! /usr/bin/env python3
# coding=utf-8

"""
sarsched_cli.py

Command-line entry point for the sensing/communication scheduling simulator.

Subcommands:
- train     Train the PPO scheduler on random eavesdropper tracks and keep the
            best checkpoint by greedy evaluation on held-out circular tracks.
- eval      Run a checkpoint on one scenario spec and write the per-slot trace,
            the per-frame sensing-to-communication table and a summary.
- sweep     Compare ppo, equal_aperture and random over eavesdropper speeds on
            circular tracks around the user.
- baseline  Equal-aperture grid search and random allocation on one scenario.

All randomness derives from --seed (see experiment_io.SEED_STREAMS).
Exit codes: 0 success, 2 configuration error, 3 runtime error.

Usage:
    python -m scripts.sarsched_cli train --config config/experiments/desk.yaml --seed 0
"""

import argparse
import sys
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from config.config import settings
from config.logging_config import LogContext, logger, logging_config
from sarsched.agent import evaluate_policy, evaluation_tracks, train
from sarsched.baselines import (disk_gap_profile, equal_aperture_grid_search, l_grid, parallel_map,
                                random_allocation)
from sarsched.checkpoint import load_checkpoint, save_checkpoint
from sarsched.exceptions import ConfigError, NonFiniteError
from sarsched.params import ExperimentFile, ScenarioConfig, config_hash, load_experiment
from sarsched.records import aggregate_logs
from sarsched.scenario import gen_eve_circular
from scripts.experiment_io import (load_scenario_spec, parse_speeds, run_dir, split_seeds,
                                   write_config_snapshot, write_csv, write_json)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SWEEP_METHODS = ("ppo", "equal_aperture", "random")
SWEEP_COLUMNS = ["speed_mps", "method", "mean_secrecy", "std_secrecy", "mean_user_rate",
                 "scr_violation_rate", "r_min_satisfied"]


def _grid_ranges(experiment: ExperimentFile, cfg: ScenarioConfig):
    b = experiment.baselines
    L_values = l_grid(b.aperture_range, cfg.min_feasible_aperture)
    I_values = list(range(b.frames_range[0], b.frames_range[1] + 1))
    return L_values, I_values


def cmd_train(args) -> int:
    experiment = load_experiment(args.config)
    cfg = experiment.scenario_config
    seeds = split_seeds(args.seed)
    out = run_dir(args.out, settings.OUTPUT_ROOT, "train")
    digest = write_config_snapshot(experiment, out)

    eval_tracks = evaluation_tracks(cfg, experiment.evaluation, seeds["eval"])
    logger.info(f"Training for {experiment.training.iterations} iterations "
                f"(N={cfg.n_slots}, {cfg.horizon_s:.1f} s per episode, seed={args.seed}, "
                f"{len(eval_tracks)} evaluation tracks)")
    result = train(cfg, experiment.agent, experiment.training, seeds["train"], eval_tracks=eval_tracks)

    save_checkpoint(out / "checkpoint.npz", result.params, digest,
                    extra={"seed": args.seed, "best_eval_secrecy": result.best_score})
    write_csv(result.curve, out / "training_curve.csv")
    return EXIT_OK


def cmd_eval(args) -> int:
    experiment = load_experiment(args.config)
    cfg = experiment.scenario_config
    seeds = split_seeds(args.seed)
    spec = load_scenario_spec(args.scenario)
    params, meta = load_checkpoint(args.checkpoint, expected_hash=config_hash(experiment))
    track = spec.build(cfg)
    if spec.phase0_rad is not None:
        cfg = cfg.replace(phase0=spec.phase0_rad)

    episode = evaluate_policy(params, cfg, [track], greedy=experiment.evaluation.greedy,
                              seed=seeds["eval"])[0]
    out = run_dir(args.out, settings.OUTPUT_ROOT, "eval")
    write_csv(episode.trace(), out / "trace.csv")
    write_csv(episode.frames(), out / "frames.csv")
    summary = episode.summary()
    summary.update({"checkpoint": str(args.checkpoint), "checkpoint_config_hash": meta["config_hash"],
                    "scenario": str(args.scenario)})
    if args.disk_samples > 0:
        gaps = disk_gap_profile(cfg, episode.actions, track, args.disk_samples,
                                seeds["disk_check"])
        write_csv(gaps, out / "disk_gaps.csv")
        summary.update({"disk_gap_mean": float(gaps["gap"].mean()) if len(gaps) else 0.0,
                        "disk_gap_max": float(gaps["gap"].max()) if len(gaps) else 0.0})
        logger.info(f"Disk-sampling gap over {len(gaps)} transmitting slots: "
                    f"mean {summary['disk_gap_mean']:.4f}, max {summary['disk_gap_max']:.4f}")
    write_json(summary, out / "summary.json")
    logger.info(f"Mean worst-case secrecy {episode.mean_secrecy:.4f} bits/s/Hz, "
                f"mean user rate {episode.mean_user_rate:.4f}, SCR violations {episode.scr_violations}")
    return EXIT_OK


def _stream_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def _sweep_cell(job) -> Dict[str, object]:
    """One (speed, method) cell of the sweep; top level so a process pool can run it."""
    method, speed_idx, speed, cfg, tracks, params, L_values, I_values, trial_cfg, seed = job
    row: Dict[str, object] = {"speed_mps": speed, "method": method}
    if method == "ppo":
        row.update(_without_episodes(aggregate_logs(evaluate_policy(params, cfg, tracks, greedy=True,
                                                                   seed=_stream_seed(seed, speed_idx)))))
        return row

    secrecy, user, violations = [], [], 0
    if method == "equal_aperture":
        for track in tracks:
            grid = equal_aperture_grid_search(cfg, track, L_values, I_values)
            winner = grid.table[grid.table["winner"]].iloc[0]
            secrecy.append(float(winner["mean_secrecy"]))
            user.append(float(winner["mean_user_rate"]))
            violations += int(winner["scr_violations"])
        episodes = len(tracks)
    else:
        trials, aperture_max, comm_max = trial_cfg
        for track_idx, track in enumerate(tracks):
            # trial k then draws from child k of this seed
            result = random_allocation(cfg, track, _stream_seed(seed, speed_idx, track_idx), trials,
                                       aperture_max, comm_max)
            secrecy.extend(result.trials["mean_secrecy"].tolist())
            user.extend(result.trials["mean_user_rate"].tolist())
            violations += result.scr_violations
        episodes = len(secrecy)
    user_arr = np.array(user)
    row.update({
        "mean_secrecy": float(np.mean(secrecy)),
        "std_secrecy": float(np.std(secrecy)),
        "mean_user_rate": float(user_arr.mean()),
        "scr_violation_rate": violations / (episodes * cfg.n_slots),
        "r_min_satisfied": bool(np.all(user_arr >= cfg.r_min)),
    })
    return row


def _without_episodes(agg: Dict[str, object]) -> Dict[str, object]:
    return {k: v for k, v in agg.items() if k != "episodes"}


def cmd_sweep(args) -> int:
    experiment = load_experiment(args.config)
    cfg = experiment.scenario_config
    sweep = experiment.sweep
    speeds = parse_speeds(args.speeds, sweep.speeds_mps, cfg.v_e_max)
    params, _ = load_checkpoint(args.checkpoint, expected_hash=config_hash(experiment))
    seeds = split_seeds(args.seed)
    L_values, I_values = _grid_ranges(experiment, cfg)
    b = experiment.baselines
    trial_cfg = (b.random_trials, b.random_aperture_max, b.random_comm_max)

    jobs = []
    for k, speed in enumerate(speeds):
        track_seeds = np.random.SeedSequence([seeds["sweep"], k]).generate_state(sweep.episodes_per_speed)
        tracks = [gen_eve_circular(cfg, sweep.radius_m, speed, int(s)) for s in track_seeds]
        for method in SWEEP_METHODS:
            jobs.append((method, k, speed, cfg, tracks, params, L_values, I_values, trial_cfg,
                         seeds["baseline"]))

    workers = args.workers or settings.WORKERS
    ctx = LogContext.with_context(logging_config.get_logger("sweep"), workers=workers)
    ctx.info(f"Sweeping {len(speeds)} speeds x {len(SWEEP_METHODS)} methods")
    rows = parallel_map(_sweep_cell, jobs, workers)
    out = run_dir(args.out, settings.OUTPUT_ROOT, "sweep")
    write_csv(pd.DataFrame(rows, columns=SWEEP_COLUMNS), out / "sweep.csv")
    return EXIT_OK


def cmd_baseline(args) -> int:
    experiment = load_experiment(args.config)
    cfg = experiment.scenario_config
    spec = load_scenario_spec(args.scenario)
    track = spec.build(cfg)
    if spec.phase0_rad is not None:
        cfg = cfg.replace(phase0=spec.phase0_rad)
    seeds = split_seeds(args.seed)
    workers = args.workers or settings.WORKERS
    b = experiment.baselines
    out = run_dir(args.out, settings.OUTPUT_ROOT, "baseline")

    L_values, I_values = _grid_ranges(experiment, cfg)
    grid = equal_aperture_grid_search(cfg, track, L_values, I_values, workers=workers)
    write_csv(grid.table, out / "equal_aperture_grid.csv")

    random_result = random_allocation(cfg, track, seeds["baseline"], b.random_trials,
                                      b.random_aperture_max, b.random_comm_max, workers=workers)
    write_csv(random_result.trials, out / "random_trials.csv")
    summary = pd.DataFrame([{
        "trials": b.random_trials,
        "mean_secrecy": random_result.mean_secrecy,
        "std_secrecy": random_result.std_secrecy,
        "mean_user_rate": random_result.mean_user_rate,
        "scr_violations": random_result.scr_violations,
    }])
    write_csv(summary, out / "random_allocation.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Sensing/communication scheduling simulator.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=settings.DEFAULT_EXPERIMENT, help="Experiment YAML file.")
    common.add_argument("--seed", type=int, default=0, help="Master seed for every random stream.")
    common.add_argument("--out", default=None, help="Output directory (default: OUTPUT_ROOT/<command>).")
    common.add_argument("--workers", type=int, default=None, help="Process pool size (default: WORKERS).")

    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", parents=[common], help="Train the PPO scheduler.")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", parents=[common], help="Evaluate a checkpoint on a scenario.")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--scenario", required=True, help="Scenario spec YAML.")
    p_eval.add_argument("--disk-samples", type=int, default=0,
                        help="Ground-disk points per transmitting slot for the sector cross-check (0: off).")
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", parents=[common], help="Speed sweep over all methods.")
    p_sweep.add_argument("--checkpoint", required=True)
    p_sweep.add_argument("--speeds", default=None, help="Comma-separated speeds in m/s.")
    p_sweep.set_defaults(func=cmd_sweep)

    p_base = sub.add_parser("baseline", parents=[common], help="Run the fixed-schedule benchmarks.")
    p_base.add_argument("--scenario", required=True, help="Scenario spec YAML.")
    p_base.set_defaults(func=cmd_baseline)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except NonFiniteError as e:
        logger.error(f"Training aborted: {e}", exc_info=True)
        return EXIT_RUNTIME
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        return EXIT_RUNTIME
    finally:
        logging_config.shutdown()


if __name__ == "__main__":
    sys.exit(main())
