"""
方向強化ランダムウォーク（DRW）シミュレーター

方向は符号付き軸番号（+1 = +e_0, -2 = -e_1 など）で表す。各フェーズの長さは
待ち時間分布から独立に引き、次の方向は規則に従って一様に選ぶ。
"""

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np

from ..exceptions import PreconditionViolation
from ..hierarchy import WaitingTimeLaw, sample_waiting_times


class DRWRule(str, Enum):
    """方向転換規則"""

    FULL = "full"  # 現在以外の 2d-1 方向
    PERPENDICULAR = "perpendicular"  # 直交する 2d-2 方向


@dataclass(frozen=True)
class DRWConfig:
    """
    DRW の設定

    initial_direction が None のとき、水平（軸 0）の正負を等確率で選ぶ。
    """

    d: int
    law: WaitingTimeLaw
    rule: DRWRule = DRWRule.FULL
    phases: int = 1
    initial_direction: Optional[int] = None

    def __post_init__(self):
        if self.d < 1:
            raise PreconditionViolation(f"d は 1 以上: {self.d}")
        if self.rule == DRWRule.PERPENDICULAR and self.d < 2:
            raise PreconditionViolation("perpendicular 規則は d >= 2 が必要")
        if self.phases < 1:
            raise PreconditionViolation(f"phases は 1 以上: {self.phases}")
        if self.initial_direction is not None and not 1 <= abs(self.initial_direction) <= self.d:
            raise PreconditionViolation(f"初期方向が不正: {self.initial_direction}")


class DRWPhase(NamedTuple):
    direction: int
    duration: int
    start: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class DRWTrace:
    """
    フェーズ列。starts[j] はフェーズ j の開始位置、final_position は最終位置
    """

    d: int
    directions: np.ndarray
    durations: np.ndarray
    starts: np.ndarray
    final_position: np.ndarray

    def __len__(self) -> int:
        return len(self.directions)

    @property
    def axes(self) -> np.ndarray:
        """0 始まりの軸番号"""
        return np.abs(self.directions) - 1

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.directions)

    def phase(self, j: int) -> DRWPhase:
        return DRWPhase(
            int(self.directions[j]),
            int(self.durations[j]),
            tuple(int(v) for v in self.starts[j]),
        )

    def displacements(self) -> np.ndarray:
        """(phases, d) のフェーズごとの変位"""
        return _displacements(self.d, self.directions, self.durations)

    def replay(self) -> np.ndarray:
        """変位を足し直した最終位置（保存値との照合用）"""
        return self.displacements().sum(axis=0)


def _displacements(d: int, directions: np.ndarray, durations: np.ndarray) -> np.ndarray:
    out = np.zeros((len(directions), d), dtype=np.int64)
    out[np.arange(len(directions)), np.abs(directions) - 1] = np.sign(directions) * durations
    return out


def _next_directions(config: DRWConfig, first: int, rng: np.random.Generator) -> np.ndarray:
    n, d = config.phases, config.d
    if config.rule == DRWRule.FULL:
        # コード c = 2·axis + (sign<0)。現在以外の 2d-1 個から一様
        code0 = 2 * (abs(first) - 1) + (first < 0)
        shifts = rng.integers(1, 2 * d, n - 1)
        codes = (code0 + np.concatenate(([0], np.cumsum(shifts)))) % (2 * d)
        axes, negative = codes // 2, codes % 2 == 1
    else:
        axis0 = abs(first) - 1
        shifts = rng.integers(1, d, n - 1)
        axes = (axis0 + np.concatenate(([0], np.cumsum(shifts)))) % d
        negative = np.concatenate(([first < 0], rng.integers(0, 2, n - 1) == 1))
    return np.where(negative, -(axes + 1), axes + 1).astype(np.int64)


def simulate_drw(config: DRWConfig, rng: np.random.Generator) -> DRWTrace:
    """
    DRW を config.phases フェーズ分シミュレートする

    長さ 0 のフェーズもフェーズとして数える（同じ点で再度方向転換する）。

    Raises:
        SamplingRangeError: 待ち時間分布がサンプリング上限を超える
    """
    durations = sample_waiting_times(config.law, config.phases, rng).astype(np.int64)
    first = config.initial_direction
    if first is None:
        first = 1 if rng.integers(0, 2) == 0 else -1
    directions = _next_directions(config, int(first), rng)

    ends = np.cumsum(_displacements(config.d, directions, durations), axis=0)
    starts = np.vstack([np.zeros((1, config.d), dtype=np.int64), ends[:-1]])
    return DRWTrace(config.d, directions, durations, starts, ends[-1].copy())


def trace_header(d: int) -> List[str]:
    names = ["start_x", "start_y", "start_z"]
    starts = names[:d] if d <= 3 else [f"start_{i}" for i in range(d)]
    return ["phase_index", "direction", "duration", *starts]


def trace_rows(trace: DRWTrace) -> List[list]:
    return [
        [j, f"{int(trace.directions[j]):+d}", int(trace.durations[j]), *[int(v) for v in trace.starts[j]]]
        for j in range(len(trace))
    ]


def save_trace_csv(trace: DRWTrace, file: Union[str, Path]):
    """phase_index,direction,duration,start_x,start_y[,start_z]"""
    with open(file, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(trace_header(trace.d))
        writer.writerows(trace_rows(trace))
