"""
乱数ストリーム・実行設定・コマンドラインのテスト
"""

import csv
import functools
import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from src.polygonal_walks.distributions import PMFMode
from src.polygonal_walks.exceptions import ConfigError
from src.polygonal_walks.hierarchy import load_params
from src.polygonal_walks.runner import (
    Command,
    RunConfig,
    Suite,
    block_ranges,
    collision_audit,
    command_key,
    estimate_over_grid,
    main,
    run_tasks,
    stream,
)
from src.polygonal_walks.runner import suites
from src.polygonal_walks.runner.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE
from src.polygonal_walks.runner.suites import (
    SuiteOutput,
    embedded_suite,
    lemmas_suite,
    params_suite,
    qkn2_suite,
    random_symmetric_unimodal,
    scaling_suite,
    series_suite,
    streams_suite,
)
from src.polygonal_walks.verification import CheckRow, EventSpec, check_unimodest
from src.polygonal_walks.walks import EventKind, lazy_walk_pmf


def read_csv(path: Path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


# ======================
# 乱数ストリーム
# ======================


def test_stream_is_reproducible():
    a = stream(42, "estimate/n=16", 3).random(8)
    b = stream(42, "estimate/n=16", 3).random(8)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("other", [(43, "estimate/n=16", 3), (42, "estimate/n=32", 3), (42, "estimate/n=16", 4)])
def test_streams_differ(other):
    base = stream(42, "estimate/n=16", 3).random(8)
    assert not np.array_equal(base, stream(*other).random(8))


def test_command_key_range():
    assert command_key(0, "verify") != command_key(0, "simulate")
    assert 0 <= command_key(2**64 - 1, "x") < 2**128
    with pytest.raises(ConfigError):
        command_key(2**64, "x")
    with pytest.raises(ConfigError):
        stream(0, "x", -1)


def test_collision_audit():
    result = collision_audit(7, "audit", 200)
    assert result.streams == 200
    assert result.passed


def test_block_ranges():
    assert block_ranges(10, 4) == [(0, 4), (1, 4), (2, 2)]
    assert block_ranges(4, 4) == [(0, 4)]
    with pytest.raises(ConfigError):
        block_ranges(0, 4)


def test_run_tasks_keeps_order():
    tasks = [-3, 1, -2, 5]
    assert run_tasks(abs, tasks, 1) == [3, 1, 2, 5]
    assert run_tasks(abs, tasks, 2) == [3, 1, 2, 5]


def test_estimate_over_grid_independent_of_workers():
    spec = EventSpec(EventKind.RETURN, lazy_walk_pmf(PMFMode.FLOAT))
    single = estimate_over_grid(spec, [2, 4, 8], 500, 11, "test", workers=1)
    parallel = estimate_over_grid(spec, [2, 4, 8], 500, 11, "test", workers=3)
    assert single == parallel
    assert single[0].seed == "test/n=2"


# ======================
# 実行設定
# ======================


@pytest.mark.parametrize(
    "fields",
    [
        {"command": "verify"},
        {"command": "construct-params", "k_max": 1},
        {"command": "estimate", "n_grid": [4, 4, 8]},
        {"command": "estimate", "n_grid": []},
        {"command": "estimate", "walk": "law"},
        {"command": "estimate", "event": "V_n", "dim": 3},
        {"command": "simulate", "law": "1:1", "params_file": "params.json"},
        {"command": "simulate", "mode": "drw", "rule": "perpendicular", "dim": 1},
        {"command": "estimate", "replicas": 0},
        {"command": "estimate", "master_seed": 2**64},
        {"command": "estimate", "confidence": 1.0},
    ],
)
def test_run_config_rejects(fields):
    with pytest.raises(ValidationError):
        RunConfig.model_validate(fields)


def test_run_config_echo_omits_workers():
    config = RunConfig(command=Command.ESTIMATE, workers=4)
    echo = config.echo()
    assert "workers" not in echo
    assert echo["command"] == "estimate"
    assert echo["n_grid"] == [16, 32, 64, 128, 256]


# ======================
# コマンドライン
# ======================


def test_unknown_suite_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["--command", "verify", "--suite", "nope"])
    assert info.value.code == EXIT_USAGE


@pytest.mark.parametrize(
    "args",
    [
        ["--command", "construct-params", "--k-max", "1"],
        ["--command", "verify"],
        ["--command", "estimate", "--walk", "law"],
        ["--command", "estimate", "--law", "1/2:1,1/3:2", "--walk", "law"],
    ],
)
def test_invalid_configuration_exit_code(args, out_dir):
    assert main([*args, "--out-dir", str(out_dir)]) == EXIT_USAGE


def test_construct_params_command(out_dir):
    assert main(["--command", "construct-params", "--k-max", "3", "--out-dir", str(out_dir)]) == EXIT_OK
    params = load_params(out_dir / "params.json")
    assert params.level(2).c_exact == 4097

    constraints = read_csv(out_dir / "construct_params_constraints.csv")
    assert constraints[0] == ["k", "constraint", "slack", "holds"]
    assert all(row[3] == "true" for row in constraints[1:])
    summary = json.loads((out_dir / "construct_params_summary.json").read_text(encoding="utf-8"))
    assert summary["all_passed"] is True
    assert summary["k_max"] == 3

    manifest = json.loads((out_dir / "run_manifest.json").read_text(encoding="utf-8"))
    assert manifest["checks"] == {"validate_params": True}
    digest = hashlib.sha256((out_dir / "params.json").read_bytes()).hexdigest()
    assert manifest["digests"]["params.json"] == digest


def test_estimate_is_byte_identical_across_workers(tmp_path):
    outputs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        args = [
            "--command", "estimate",
            "--event", "sign_change",
            "--n-grid", "1,2,4,8,16",
            "--replicas", "400",
            "--seed", "99",
            "--workers", workers,
            "--out-dir", str(out),
        ]  # fmt: skip
        assert main(args) == EXIT_OK
        outputs.append(out)
    for name in ("estimate_points.csv", "estimate_summary.json"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()
    first = json.loads((outputs[0] / "run_manifest.json").read_text(encoding="utf-8"))
    second = json.loads((outputs[1] / "run_manifest.json").read_text(encoding="utf-8"))
    assert first["digests"] == second["digests"]
    assert first["config"] == second["config"]


def test_estimate_segment_hit_factor_columns(out_dir):
    args = ["--command", "estimate", "--event", "segment_hit", "--dim", "2", "--n-grid", "2,4,8,16"]
    assert main([*args, "--replicas", "300", "--out-dir", str(out_dir)]) == EXIT_OK
    table = read_csv(out_dir / "estimate_points.csv")
    assert table[0][-2:] == ["factor_bound", "factor_ci_hi"]
    assert len(table) == 5


def test_simulate_drw_zero_durations(out_dir):
    args = ["--command", "simulate", "--mode", "drw", "--dim", "2", "--law", "1:0", "--phases", "5", "--replicas", "2"]
    assert main([*args, "--out-dir", str(out_dir)]) == EXIT_OK
    table = read_csv(out_dir / "simulate_traces.csv")
    assert table[0] == ["replica", "phase_index", "direction", "duration", "start_x", "start_y"]
    assert len(table) == 1 + 2 * 5
    assert all(row[3] == "0" for row in table[1:])
    summary = json.loads((out_dir / "simulate_summary.json").read_text(encoding="utf-8"))
    assert summary["final_positions"] == [[0, 0], [0, 0]]
    assert summary["origin_events"][0] == {"visits": 1, "direction_changes": 4, "boundary_visits": 6}


def test_simulate_walk(out_dir):
    args = ["--command", "simulate", "--dim", "2", "--steps", "20", "--replicas", "3", "--seed", "5"]
    assert main([*args, "--out-dir", str(out_dir)]) == EXIT_OK
    table = read_csv(out_dir / "simulate_paths.csv")
    assert table[0] == ["replica", "step", "x0", "x1"]
    assert len(table) == 1 + 3 * 21
    assert table[1] == ["0", "0", "0", "0"]


def test_simulate_walk_with_law(out_dir):
    args = ["--command", "simulate", "--walk", "law", "--law", "1:0", "--steps", "10", "--replicas", "2"]
    assert main([*args, "--out-dir", str(out_dir)]) == EXIT_OK
    summary = json.loads((out_dir / "simulate_summary.json").read_text(encoding="utf-8"))
    assert summary["final_positions"] == [[0], [0]]


def test_verify_streams_command(out_dir):
    args = ["--command", "verify", "--suite", "streams", "--replicas", "100"]
    assert main([*args, "--out-dir", str(out_dir)]) == EXIT_OK
    table = read_csv(out_dir / "verify_checks.csv")
    assert [row[0] for row in table[1:]] == ["stream_collisions", "worker_determinism"]
    summary = json.loads((out_dir / "verify_summary.json").read_text(encoding="utf-8"))
    assert summary["failed"] == 0


# ======================
# スイート（小さい設定）
# ======================


def test_lemmas_suite_small(out_dir):
    config = RunConfig(command=Command.VERIFY, suite="lemmas", out_dir=out_dir)
    result = lemmas_suite(config, momest_laws=30, unimod_laws=2, unimodest_laws=30, maxest_m=range(1, 9))
    failed = [f"{r.check_name}[{r.param_summary}]" for r in result.rows if not r.holds]
    assert failed == []
    names = {r.check_name for r in result.rows}
    assert {"momest", "unimod", "unimodest", "maxest", "recurrevents", "recurrevents_violator"} <= names
    assert (out_dir / "verify_maxest.csv").exists()


def test_params_suite_fixed_values(out_dir):
    config = RunConfig(command=Command.VERIFY, suite="params", out_dir=out_dir)
    rows = {r.check_name: r for r in params_suite(config).rows}
    assert rows["params_c2"].holds
    assert rows["params_y2"].holds


def test_streams_suite(out_dir):
    config = RunConfig(command=Command.VERIFY, suite="streams", replicas=150, workers=1, out_dir=out_dir)
    result = streams_suite(config)
    assert all(r.holds for r in result.rows)
    assert result.replicas == {"worker_determinism": 150}


def test_unimodest_corpus_uses_integer_radii():
    rng = np.random.default_rng(7)
    for _ in range(50):
        mu, sigma = random_symmetric_unimodal(rng)
        assert sigma >= 1
        result = check_unimodest(mu, list(range(1, math.floor(sigma) + 1)))
        assert result.holds
        assert float(result.worst_c).is_integer()


def assert_rows_well_formed(result: SuiteOutput, expected: set):
    assert all(isinstance(r, CheckRow) and isinstance(r.holds, bool) for r in result.rows)
    assert expected <= {r.check_name for r in result.rows}


def test_embedded_suite_small(out_dir):
    config = RunConfig(command=Command.VERIFY, suite="embedded", out_dir=out_dir)
    result = embedded_suite(config, increments=5000)
    expected = {
        "embedded_chi2_horizontal",
        "embedded_chi2_vertical",
        "embedded_independence",
        "embedded_run_length",
        "perpendicular_symmetry",
        "drw_replay",
    }
    assert_rows_well_formed(result, expected)
    rows = {r.check_name: r for r in result.rows}
    assert rows["drw_replay"].holds
    assert result.replicas == {"embedded": 5000, "perpendicular": 5000}


def test_scaling_suite_small(out_dir):
    config = RunConfig(command=Command.VERIFY, suite="scaling", replicas=200, out_dir=out_dir)
    result = scaling_suite(config, hit_paths=20, hit_length=200, calibration_runs=5)
    expected = {
        "scaling_return_exact",
        "scaling_level_crossing",
        "scaling_box_visit",
        "scaling_segment_hit",
        "mean_polygonal_hits",
        "dlambda_sup",
        "mc_calibration",
    }
    assert_rows_well_formed(result, expected)
    rows = {r.check_name: r for r in result.rows}
    # 厳密計算の傾きは反復数によらない
    assert rows["scaling_return_exact"].holds
    assert result.replicas["mean_polygonal_hits"] == 20
    table = read_csv(out_dir / "verify_scaling_points.csv")
    assert table[0] == ["series", "n", "p_hat", "ci_lo", "ci_hi"]
    assert {row[0] for row in table[1:]} >= {"lazy_return_exact", "interval_hit_cubed"}


def test_qkn2_suite_small(out_dir):
    config = RunConfig(command=Command.VERIFY, suite="qkn2", replicas=200, out_dir=out_dir)
    result = qkn2_suite(config)
    assert_rows_well_formed(result, {"qkn2", "tail_bound"})
    assert sum(r.check_name == "qkn2" for r in result.rows) == 4
    assert sum(r.check_name == "tail_bound" for r in result.rows) == 4
    assert result.replicas["qkn2"] == 200
    assert [p.name for p in result.outputs] == ["verify_qkn2.csv", "verify_qkn2_l2.csv"]
    assert len(read_csv(out_dir / "verify_qkn2.csv")) == 1 + 4


def test_series_suite_small(out_dir):
    config = RunConfig(command=Command.VERIFY, suite="series", replicas=200, out_dir=out_dir)
    result = series_suite(config)
    assert_rows_well_formed(result, {"log_series", "quantile_bound", "sign_change_exact_in_ci"})
    rows = [r for r in result.rows if r.check_name == "log_series"]
    # 閉じた式との比較は決定的
    assert len(rows) == 3 and all(r.holds for r in rows)
    assert result.replicas == {"quantile_bound": 200}
    table = read_csv(out_dir / "verify_series.csv")
    assert table[0][0] == "n"


def test_verify_exit_code_follows_failed_rows(out_dir, monkeypatch):
    def failing(config):
        rows = [
            CheckRow(check_name="ok", param_summary="a=1", holds=True),
            CheckRow(check_name="bad", param_summary="a=2", holds=False),
        ]
        return SuiteOutput(rows, {"bad": 3}, [])

    monkeypatch.setitem(suites.SUITES, Suite.PARAMS, failing)
    assert main(["--command", "verify", "--suite", "params", "--out-dir", str(out_dir)]) == EXIT_FAILED
    summary = json.loads((out_dir / "verify_summary.json").read_text(encoding="utf-8"))
    assert summary["total"] == 2
    assert summary["failures"] == ["bad[a=2]"]
    assert summary["replicas"] == {"bad": 3}
    table = read_csv(out_dir / "verify_checks.csv")
    assert [row[-1] for row in table[1:]] == ["true", "false"]
    manifest = json.loads((out_dir / "run_manifest.json").read_text(encoding="utf-8"))
    assert manifest["checks"] == {"ok[a=1]": True, "bad[a=2]": False}


def test_verify_all_small(out_dir, monkeypatch):
    small = {
        Suite.LEMMAS: functools.partial(
            lemmas_suite, momest_laws=20, unimod_laws=2, unimodest_laws=10, maxest_m=range(1, 5)
        ),
        Suite.SCALING: functools.partial(scaling_suite, hit_paths=10, hit_length=100, calibration_runs=3),
        Suite.EMBEDDED: functools.partial(embedded_suite, increments=2000),
    }
    for suite, fn in small.items():
        monkeypatch.setitem(suites.SUITES, suite, fn)

    code = main(["--command", "verify", "--suite", "all", "--replicas", "200", "--out-dir", str(out_dir)])
    summary = json.loads((out_dir / "verify_summary.json").read_text(encoding="utf-8"))
    assert summary["suite"] == "all"
    assert code == (EXIT_OK if summary["failed"] == 0 else EXIT_FAILED)

    table = read_csv(out_dir / "verify_checks.csv")
    assert summary["total"] == len(table) - 1
    failed = [f"{row[0]}[{row[1]}]" for row in table[1:] if row[-1] == "false"]
    assert summary["failures"] == failed
    names = {row[0] for row in table[1:]}
    assert {"momest", "scaling_return_exact", "params_c2", "drw_replay", "qkn2", "log_series"} <= names
    assert "stream_collisions" in names
