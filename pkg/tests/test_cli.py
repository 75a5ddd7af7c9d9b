import json

import pandas as pd
import pytest
import yaml

from scripts.experiment_io import SEED_STREAMS, load_scenario_spec, parse_speeds, split_seeds
from scripts.sarsched_cli import EXIT_CONFIG, EXIT_OK, SWEEP_COLUMNS, SWEEP_METHODS, _stream_seed, main
from sarsched.baselines import DISK_GAP_COLUMNS, GRID_COLUMNS, TRIAL_COLUMNS
from sarsched.exceptions import ConfigError
from sarsched.params import ScenarioConfig
from sarsched.records import FRAME_COLUMNS, TRACE_COLUMNS

from conftest import SCENARIOS


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "circle.yaml"
    path.write_text(yaml.safe_dump({"kind": "circular", "seed": 5,
                                    "params": {"radius_m": 55.0, "speed_mps": 14.0}}), encoding="utf-8")
    return path


def _train(config, out):
    assert main(["train", "--config", str(config), "--seed", "0", "--out", str(out)]) == EXIT_OK
    return out / "checkpoint.npz"


def test_missing_config_exits_with_config_error(tmp_path):
    code = main(["train", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path / "run")])
    assert code == EXIT_CONFIG


def test_train_writes_artefacts(tiny_experiment_file, tmp_path):
    out = tmp_path / "train"
    _train(tiny_experiment_file, out)
    for name in ("checkpoint.npz", "training_curve.csv", "config_snapshot.yaml", "config_hash.txt"):
        assert (out / name).exists()
    curve = pd.read_csv(out / "training_curve.csv")
    assert list(curve["iteration"]) == [1, 2]


def test_training_is_byte_reproducible(tiny_experiment_file, tmp_path):
    _train(tiny_experiment_file, tmp_path / "a")
    _train(tiny_experiment_file, tmp_path / "b")
    for name in ("training_curve.csv", "config_hash.txt", "config_snapshot.yaml"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_snapshot_records_derived_constants(tiny_experiment_file, tmp_path):
    out = tmp_path / "train"
    _train(tiny_experiment_file, out)
    snapshot = yaml.safe_load((out / "config_snapshot.yaml").read_text(encoding="utf-8"))
    derived = snapshot["derived"]
    assert derived["eta_deg"] == pytest.approx(63.4349488, rel=1e-6)
    assert derived["delta_r_m"] == pytest.approx(0.167705098, rel=1e-6)
    assert derived["min_feasible_aperture"] == 3
    assert derived["m_c"] == 10
    assert derived["horizon_s"] == pytest.approx(2.0)


def test_eval_writes_trace_and_summary(tiny_experiment_file, scenario_file, tmp_path):
    checkpoint = _train(tiny_experiment_file, tmp_path / "train")
    out = tmp_path / "eval"
    code = main(["eval", "--config", str(tiny_experiment_file), "--checkpoint", str(checkpoint),
                 "--scenario", str(scenario_file), "--out", str(out)])
    assert code == EXIT_OK
    trace = pd.read_csv(out / "trace.csv")
    frames = pd.read_csv(out / "frames.csv")
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert list(trace.columns) == TRACE_COLUMNS
    assert list(frames.columns) == FRAME_COLUMNS
    assert len(trace) == 20
    assert summary["mean_secrecy"] == pytest.approx(trace["R"].sum() / 20, abs=1e-9)
    assert summary["mean_user_rate"] == pytest.approx(trace["R_u"].sum() / 20, abs=1e-9)
    assert summary["frames"] == len(frames)


def test_eval_disk_check(tiny_experiment_file, scenario_file, tmp_path):
    checkpoint = _train(tiny_experiment_file, tmp_path / "train")
    out = tmp_path / "eval"
    code = main(["eval", "--config", str(tiny_experiment_file), "--checkpoint", str(checkpoint),
                 "--scenario", str(scenario_file), "--disk-samples", "200", "--out", str(out)])
    assert code == EXIT_OK
    gaps = pd.read_csv(out / "disk_gaps.csv")
    trace = pd.read_csv(out / "trace.csv")
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert list(gaps.columns) == DISK_GAP_COLUMNS
    assert set(gaps["n"]) <= set(trace.loc[trace["action"] == 0, "n"])
    if len(gaps):
        assert summary["disk_gap_max"] == pytest.approx(gaps["gap"].max(), abs=1e-9)
    else:
        assert summary["disk_gap_max"] == 0.0


def test_eval_with_missing_checkpoint(tiny_experiment_file, scenario_file, tmp_path):
    code = main(["eval", "--config", str(tiny_experiment_file), "--checkpoint", str(tmp_path / "none.npz"),
                 "--scenario", str(scenario_file), "--out", str(tmp_path / "eval")])
    assert code != EXIT_OK


def test_sweep_table(tiny_experiment_file, tmp_path):
    checkpoint = _train(tiny_experiment_file, tmp_path / "train")
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", str(tiny_experiment_file), "--checkpoint", str(checkpoint),
                 "--out", str(out)])
    assert code == EXIT_OK
    table = pd.read_csv(out / "sweep.csv")
    assert list(table.columns) == SWEEP_COLUMNS
    assert len(table) == 2 * len(SWEEP_METHODS)
    assert set(table["method"]) == set(SWEEP_METHODS)
    assert sorted(set(table["speed_mps"])) == [0.0, 14.0]


def test_sweep_rejects_impossible_speed(tiny_experiment_file, tmp_path):
    checkpoint = _train(tiny_experiment_file, tmp_path / "train")
    code = main(["sweep", "--config", str(tiny_experiment_file), "--checkpoint", str(checkpoint),
                 "--speeds", "10,30", "--out", str(tmp_path / "sweep")])
    assert code == EXIT_CONFIG


def test_baseline_outputs_are_reproducible(tiny_experiment_file, scenario_file, tmp_path):
    for run in ("a", "b"):
        code = main(["baseline", "--config", str(tiny_experiment_file), "--scenario", str(scenario_file),
                     "--seed", "4", "--out", str(tmp_path / run)])
        assert code == EXIT_OK
    grid = pd.read_csv(tmp_path / "a" / "equal_aperture_grid.csv")
    trials = pd.read_csv(tmp_path / "a" / "random_trials.csv")
    summary = pd.read_csv(tmp_path / "a" / "random_allocation.csv")
    assert list(grid.columns) == GRID_COLUMNS
    assert len(grid) == 3 * 3
    assert grid["winner"].sum() == 1
    assert list(trials.columns) == TRIAL_COLUMNS
    assert len(trials) == 3
    assert len(summary) == 1
    for name in ("equal_aperture_grid.csv", "random_trials.csv", "random_allocation.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bad_scenario_spec(tiny_experiment_file, tmp_path):
    spec = tmp_path / "spiral.yaml"
    spec.write_text("kind: spiral\nseed: 1\n", encoding="utf-8")
    code = main(["baseline", "--config", str(tiny_experiment_file), "--scenario", str(spec),
                 "--out", str(tmp_path / "run")])
    assert code == EXIT_CONFIG


def test_shipped_scenarios_build():
    cfg = ScenarioConfig(n_slots=200)
    for path in sorted(SCENARIOS.glob("*.yaml")):
        track = load_scenario_spec(path).build(cfg)
        assert len(track) == 200


def test_missing_scenario_parameter(tmp_path):
    spec = tmp_path / "circle.yaml"
    spec.write_text("kind: circular\nparams:\n  radius_m: 55.0\n", encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        load_scenario_spec(spec).build(ScenarioConfig(n_slots=20))
    assert "params.speed_mps" in excinfo.value.fields


def test_split_seeds_are_stable_and_distinct():
    a, b = split_seeds(0), split_seeds(0)
    assert a == b
    assert list(a) == list(SEED_STREAMS)
    assert len(set(a.values())) == len(SEED_STREAMS)
    assert split_seeds(1) != a


def test_parse_speeds():
    assert parse_speeds("0, 2.5,14", [1.0], 28.0) == [0.0, 2.5, 14.0]
    assert parse_speeds(None, [1.0, 2.0], 28.0) == [1.0, 2.0]
    with pytest.raises(ConfigError):
        parse_speeds("-1", [], 28.0)


def test_sweep_stream_seeds_are_keyed():
    seed = 1234
    keyed = {(speed, track): _stream_seed(seed, speed, track) for speed in range(8) for track in range(4)}
    assert len(set(keyed.values())) == len(keyed)
    assert keyed[(1, 0)] != keyed[(0, 1)]
    assert _stream_seed(seed, 0, 0) != _stream_seed(seed + 1, 0, 0)
    assert _stream_seed(seed, 2, 3) == keyed[(2, 3)]
