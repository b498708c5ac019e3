"""
増分のサンプリングとランダムウォークのシミュレーション

X = ε Σ_{i=1}^{G} (-1)^i T_i。G は幾何分布（パラメータ 2/3、台 {1,2,...}）、
T_i は待ち時間分布（K 指定時は打ち切り T^{|K}）からの独立ドロー。
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..distributions import LatticePMF, PMFMode, convolution_power, to_floating
from ..exceptions import PreconditionViolation
from ..hierarchy import WaitingTimeLaw, sample_kappa
from ..hierarchy.sampling import check_sampleable

G_SUCCESS = 2.0 / 3.0


@dataclass(frozen=True)
class IncrementMeta:
    """1 つの増分の内訳（診断用）"""

    G: int
    epsilon: int
    kappas: Tuple[int, ...]


@dataclass(frozen=True)
class IncrementBatch:
    """size 個の増分。kappas は全項を連結したもの（項 j は group_starts で区切る）"""

    values: np.ndarray
    G: np.ndarray
    epsilon: np.ndarray
    kappas: np.ndarray
    group_starts: np.ndarray

    def meta(self, i: int) -> IncrementMeta:
        start = int(self.group_starts[i])
        stop = start + int(self.G[i])
        return IncrementMeta(int(self.G[i]), int(self.epsilon[i]), tuple(int(k) for k in self.kappas[start:stop]))


def sample_increments(
    law: WaitingTimeLaw, size: int, rng: np.random.Generator, K: Optional[int] = None
) -> IncrementBatch:
    """
    増分 X（K 指定時は X^{(K)|K}）を size 個

    Raises:
        SamplingRangeError: y_K（K 省略時は y_L）がサンプリング上限を超える
    """
    level = law.L if K is None else K
    check_sampleable(law, level)
    G = rng.geometric(G_SUCCESS, size).astype(np.int64)
    total = int(G.sum())
    kappa = sample_kappa(law, total, rng, level)
    T = rng.integers(0, law.heights[kappa - 1] + 1)

    starts = np.cumsum(G) - G
    position = np.arange(total) - np.repeat(starts, G)
    # i = position + 1 が奇数なら -T
    signs = np.where(position % 2 == 0, -1, 1)
    sums = np.add.reduceat(signs * T, starts)
    epsilon = rng.integers(0, 2, size) * 2 - 1
    return IncrementBatch(epsilon * sums, G, epsilon, kappa, starts)


def sample_increment(
    law: WaitingTimeLaw, K: Optional[int], rng: np.random.Generator
) -> Tuple[int, IncrementMeta]:
    """増分を 1 つ引き、(x, meta) を返す"""
    batch = sample_increments(law, 1, rng, K)
    return int(batch.values[0]), batch.meta(0)


@dataclass(frozen=True, eq=False)
class WalkPath:
    """
    整数格子上の経路。positions は (n+1, dim) で positions[0] は原点
    """

    dim: int
    positions: np.ndarray

    def __post_init__(self):
        if self.positions.ndim != 2 or self.positions.shape[1] != self.dim:
            raise PreconditionViolation(f"positions の形が不正: {self.positions.shape}")
        if not np.issubdtype(self.positions.dtype, np.integer):
            raise PreconditionViolation("座標は整数")
        if len(self.positions) and np.any(self.positions[0] != 0):
            raise PreconditionViolation("positions[0] は原点")

    @classmethod
    def from_positions(cls, positions: Sequence[Sequence[int]]) -> "WalkPath":
        arr = np.asarray(positions, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr[:, None]
        return cls(arr.shape[1], arr)

    @property
    def steps(self) -> int:
        return max(len(self.positions) - 1, 0)

    def coordinate(self, c: int) -> np.ndarray:
        return self.positions[:, c]

    def increments(self) -> np.ndarray:
        return np.diff(self.positions, axis=0)

    def negated(self) -> "WalkPath":
        return WalkPath(self.dim, -self.positions)


def simulate_walk(
    d: int, law: WaitingTimeLaw, K: Optional[int], n: int, rng: np.random.Generator
) -> WalkPath:
    """
    d 個の独立な座標ウォーク（各座標は独立な子ストリーム）
    """
    if n < 1:
        raise PreconditionViolation(f"n は 1 以上: {n}")
    columns = []
    for child in rng.spawn(d):
        steps = sample_increments(law, n, child, K).values
        columns.append(np.concatenate(([0], np.cumsum(steps))))
    return WalkPath(d, np.stack(columns, axis=1).astype(np.int64))


def lazy_walk_pmf(mode: PMFMode = PMFMode.EXACT) -> LatticePMF:
    """遅延単純ウォークの増分 {-1:1/4, 0:1/2, 1:1/4}"""
    return LatticePMF.from_weights(-1, ["1/4", "1/2", "1/4"] if mode == PMFMode.EXACT else [0.25, 0.5, 0.25], mode)


def simple_walk_pmf(mode: PMFMode = PMFMode.EXACT) -> LatticePMF:
    """単純ウォークの増分 {-1:1/2, 1:1/2}"""
    return LatticePMF.from_weights(-1, ["1/2", "0", "1/2"] if mode == PMFMode.EXACT else [0.5, 0.0, 0.5], mode)


def simulate_walk_batch(
    increment: LatticePMF, d: int, n: int, paths: int, rng: np.random.Generator
) -> np.ndarray:
    """
    増分分布 increment の積ウォークを paths 本まとめて生成

    Returns:
        (paths, n+1, d) の int64 配列
    """
    steps = increment.sample(paths * n * d, rng).reshape(paths, n, d)
    out = np.zeros((paths, n + 1, d), dtype=np.int64)
    np.cumsum(steps, axis=1, out=out[:, 1:, :])
    return out


def sample_position_batch(
    increment: LatticePMF, d: int, n: int, size: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (S_n, S_{n+1}) を size 組引く

    S_n は increment の n 回畳み込み（浮動小数点）から直接引き、X_{n+1} を足す。

    Returns:
        ((size, d), (size, d))
    """
    law_n = convolution_power(to_floating(increment), n)
    s_n = law_n.sample(size * d, rng).reshape(size, d)
    step = increment.sample(size * d, rng).reshape(size, d)
    return s_n, s_n + step


def path_header(dim: int) -> List[str]:
    return ["step", *[f"x{i}" for i in range(dim)]]


def path_rows(path: WalkPath) -> List[List[int]]:
    return [[n, *[int(v) for v in row]] for n, row in enumerate(path.positions)]


def save_path_csv(path: WalkPath, file: Union[str, Path]):
    """1 行 1 ステップで経路を書き出す"""
    with open(file, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(path_header(path.dim))
        writer.writerows(path_rows(path))
