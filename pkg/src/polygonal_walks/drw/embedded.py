"""
DRW トレースからの埋め込みウォーク抽出と点ごとの集計
"""

from typing import NamedTuple, Sequence

import numpy as np

from ..exceptions import PreconditionViolation
from ..walks import WalkPath
from .simulator import DRWTrace


class PointEvents(NamedTuple):
    """
    visits: 単位時間ごとの通過回数（フェーズ内部を含む）
    direction_changes: 点上のフェーズ境界の数
    boundary_visits: 点上のフェーズ端点の数（原点出発と最終位置を含む）
    """

    visits: int
    direction_changes: int
    boundary_visits: int


def embedded_walk(trace: DRWTrace, vertical_axis: int = 1, close_final_run: bool = True) -> WalkPath:
    """
    垂直運動から水平運動へ戻る位置の列 (S_n, S~_n) を返す

    Args:
        trace: 2 次元の DRW トレース
        vertical_axis: 垂直とみなす軸（0 始まり）
        close_final_run: 最後のフェーズが垂直なら最終位置も点として加える

    Returns:
        原点から始まる 2 次元の WalkPath。該当する転換がなければ原点のみ
    """
    if trace.d != 2:
        raise PreconditionViolation(f"埋め込みウォークは d = 2 のみ: d={trace.d}")
    vertical = trace.axes == vertical_axis
    changes = np.nonzero(vertical[:-1] & ~vertical[1:])[0] + 1
    points = [np.zeros((1, 2), dtype=np.int64), trace.starts[changes]]
    if close_final_run and vertical[-1]:
        points.append(trace.final_position[None, :])
    return WalkPath(2, np.concatenate(points).astype(np.int64))


def point_events(trace: DRWTrace, point: Sequence[int]) -> PointEvents:
    p = np.asarray(point, dtype=np.int64)
    if p.shape != (trace.d,):
        raise PreconditionViolation(f"次元が一致しない: {len(p)} != {trace.d}")

    rows = np.arange(len(trace))
    axes = trace.axes
    diff = p[None, :] - trace.starts
    offset = diff[rows, axes] * trace.signs
    diff[rows, axes] = 0
    on_line = np.all(diff == 0, axis=1)
    at_final = int(np.array_equal(trace.final_position, p))

    interior = on_line & (offset >= 0) & (offset < trace.durations)
    at_start = np.all(trace.starts == p[None, :], axis=1)
    return PointEvents(
        visits=int(interior.sum()) + at_final,
        direction_changes=int(at_start[1:].sum()),
        boundary_visits=int(at_start.sum()) + at_final,
    )


def _runs_on_axis(trace: DRWTrace, axis: int):
    """軸 axis 上の極大連続区間の (先頭, 末尾)。別の軸で終わるものだけ"""
    on = trace.axes == axis
    before = np.concatenate(([False], on[:-1]))
    after = np.concatenate((on[1:], [False]))
    first = np.nonzero(on & ~before)[0]
    last = np.nonzero(on & ~after)[0]
    closed = last < len(trace) - 1
    return first[closed], last[closed]


def horizontal_run_lengths(trace: DRWTrace, vertical_axis: int = 1) -> np.ndarray:
    """垂直フェーズの直前に続いた水平フェーズの個数（0 は除く）"""
    v_idx = np.nonzero(trace.axes == vertical_axis)[0]
    prev = np.concatenate(([-1], v_idx[:-1]))
    gaps = v_idx - prev - 1
    return gaps[gaps > 0]


def vertical_run_increments(trace: DRWTrace, axis: int = 1) -> np.ndarray:
    """軸 axis 上の各連続区間の符号付き変位"""
    first, last = _runs_on_axis(trace, axis)
    cs = np.concatenate(([0], np.cumsum(trace.displacements()[:, axis])))
    return cs[last + 1] - cs[first]
