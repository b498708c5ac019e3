"""
方向強化ランダムウォークのテスト
"""

import numpy as np
import pytest

from src.polygonal_walks.drw import (
    DRWConfig,
    DRWRule,
    DRWTrace,
    embedded_walk,
    horizontal_run_lengths,
    point_events,
    save_trace_csv,
    simulate_drw,
    trace_header,
    vertical_run_increments,
)
from src.polygonal_walks.distributions import PMFMode, law_of_X
from src.polygonal_walks.exceptions import PreconditionViolation
from src.polygonal_walks.hierarchy import as_pmf, law_from_spec
from src.polygonal_walks.verification import chi_square_against_pmf, independence_test

LAW = law_from_spec("3/4:1,1/4:3")


def make_trace(d, directions, durations) -> DRWTrace:
    """方向と長さからトレースを組み立てる"""
    directions = np.asarray(directions, dtype=np.int64)
    durations = np.asarray(durations, dtype=np.int64)
    steps = np.zeros((len(directions), d), dtype=np.int64)
    steps[np.arange(len(directions)), np.abs(directions) - 1] = np.sign(directions) * durations
    ends = np.cumsum(steps, axis=0)
    starts = np.vstack([np.zeros((1, d), dtype=np.int64), ends[:-1]])
    return DRWTrace(d, directions, durations, starts, ends[-1].copy())


# ======================
# シミュレーション
# ======================


def test_zero_durations(rng):
    trace = simulate_drw(DRWConfig(d=2, law=law_from_spec("1:0"), phases=50), rng)
    assert len(trace) == 50
    assert np.all(trace.durations == 0)
    assert np.all(trace.final_position == 0)
    assert np.all(trace.starts == 0)


@pytest.mark.parametrize("rule, d", [(DRWRule.FULL, 1), (DRWRule.FULL, 3), (DRWRule.PERPENDICULAR, 2)])
def test_replay_matches_final_position(rule, d, rng):
    trace = simulate_drw(DRWConfig(d=d, law=LAW, rule=rule, phases=500), rng)
    assert np.array_equal(trace.replay(), trace.final_position)
    assert np.all((trace.durations >= 0) & (trace.durations <= 3))
    assert np.all((np.abs(trace.directions) >= 1) & (np.abs(trace.directions) <= d))


def test_full_rule_always_turns(rng):
    trace = simulate_drw(DRWConfig(d=2, law=LAW, phases=2000), rng)
    assert np.all(trace.directions[1:] != trace.directions[:-1])
    # 4 方向すべてが現れる
    assert set(np.unique(trace.directions)) == {-2, -1, 1, 2}


def test_full_rule_one_dimension_reverses(rng):
    trace = simulate_drw(DRWConfig(d=1, law=LAW, phases=100), rng)
    assert np.all(trace.directions[1:] == -trace.directions[:-1])


def test_perpendicular_rule_changes_axis(rng):
    trace = simulate_drw(DRWConfig(d=3, law=LAW, rule=DRWRule.PERPENDICULAR, phases=2000), rng)
    assert np.all(trace.axes[1:] != trace.axes[:-1])
    signs = trace.signs[1:]
    assert abs(np.mean(signs > 0) - 0.5) < 0.05


def test_initial_direction(rng):
    trace = simulate_drw(DRWConfig(d=2, law=LAW, phases=10, initial_direction=-2), rng)
    assert trace.directions[0] == -2


@pytest.mark.parametrize(
    "kwargs",
    [
        {"d": 0},
        {"d": 1, "rule": DRWRule.PERPENDICULAR},
        {"d": 2, "phases": 0},
        {"d": 2, "initial_direction": 3},
    ],
)
def test_config_rejects(kwargs):
    with pytest.raises(PreconditionViolation):
        DRWConfig(law=LAW, **kwargs)


def test_save_trace_csv(tmp_path):
    trace = make_trace(2, [1, 2, -1], [2, 1, 2])
    file = tmp_path / "trace.csv"
    save_trace_csv(trace, file)
    lines = file.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(trace_header(2))
    assert lines[0] == "phase_index,direction,duration,start_x,start_y"
    assert lines[2] == "1,+2,1,2,0"
    assert lines[3] == "2,-1,2,2,1"


# ======================
# 点ごとの集計
# ======================


def test_point_events_hand_built():
    trace = make_trace(2, [1, 2, -1], [2, 1, 2])
    assert np.array_equal(trace.final_position, [0, 1])

    corner = point_events(trace, (2, 0))
    assert corner == (1, 1, 1)
    origin = point_events(trace, (0, 0))
    assert origin == (1, 0, 1)
    end = point_events(trace, (0, 1))
    assert end == (1, 0, 1)
    for events in (corner, origin, end):
        assert events.direction_changes <= events.visits + 1


def test_point_events_zero_length_phases():
    # 長さ 0 のフェーズでは同じ点で何度も方向が変わる
    trace = make_trace(2, [1, 2, -1, -2], [0, 0, 0, 0])
    events = point_events(trace, (0, 0))
    assert events.visits == 1
    assert events.direction_changes == 3
    assert events.boundary_visits == 5


def test_point_events_dimension_mismatch():
    with pytest.raises(PreconditionViolation):
        point_events(make_trace(2, [1], [1]), (0, 0, 0))


# ======================
# 埋め込みウォーク
# ======================


def test_embedded_walk_hand_built():
    trace = make_trace(2, [1, 2, 2, -1, -2], [1, 2, 3, 1, 4])
    walk = embedded_walk(trace)
    assert walk.positions.tolist() == [[0, 0], [1, 5], [0, 1]]
    assert embedded_walk(trace, close_final_run=False).positions.tolist() == [[0, 0], [1, 5]]


def test_embedded_walk_origin(rng):
    trace = simulate_drw(DRWConfig(d=2, law=LAW, phases=300), rng)
    walk = embedded_walk(trace)
    assert np.all(walk.positions[0] == 0)
    with pytest.raises(PreconditionViolation):
        embedded_walk(make_trace(3, [1, 3], [1, 1]))


def test_embedded_increments_follow_law_of_X(rng):
    trace = simulate_drw(DRWConfig(d=2, law=LAW, phases=60_000), rng)
    steps = np.diff(embedded_walk(trace, close_final_run=False).positions, axis=0)
    assert len(steps) > 10_000
    oracle = law_of_X(as_pmf(LAW, PMFMode.FLOAT)).law
    for axis in (0, 1):
        assert chi_square_against_pmf(steps[:, axis], oracle).pvalue > 0.001
    # 水平成分と垂直成分は独立
    assert independence_test(steps[:, 0], steps[:, 1]).pvalue > 0.001


def test_run_statistics_hand_built():
    trace = make_trace(2, [1, 1, 2, 1, 2], [1, 1, 1, 1, 1])
    assert horizontal_run_lengths(trace).tolist() == [2, 1]
    trace = make_trace(2, [1, 2, 2, -1, -2], [1, 2, 3, 1, 4])
    # 最後の垂直区間は閉じていないので数えない
    assert vertical_run_increments(trace).tolist() == [5]


def test_horizontal_run_mean(rng):
    # full 規則 (d=2) では水平の連続回数は平均 3/2
    trace = simulate_drw(DRWConfig(d=2, law=LAW, phases=60_000), rng)
    runs = horizontal_run_lengths(trace)
    assert abs(runs.mean() - 1.5) < 0.03
