"""
待ち時間分布 T ~ Σ p_l·R[0, y_l]（一様分布の混合）とその打ち切り
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Tuple, Union

import numpy as np

from ..distributions import LatticePMF, PMFMode
from ..distributions.lattice_pmf import _check_cap
from ..exceptions import InvalidMixtureError, LevelOutOfRangeError

ProbabilityLike = Union[Fraction, int, float, str]


def _to_fraction(x: ProbabilityLike) -> Fraction:
    # float は 10 進表記経由で厳密化（0.75 -> 3/4）
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class WaitingTimeLaw:
    """
    レベル列 ((p_1, y_1), ..., (p_L, y_L))

    不変条件: Σ p_l = 1, p_l > 0, y_l は狭義単調増加。
    """

    levels: Tuple[Tuple[Fraction, int], ...]

    def __post_init__(self):
        if not self.levels:
            raise InvalidMixtureError("レベルが空")
        if any(p <= 0 for p, _ in self.levels):
            raise InvalidMixtureError("p_l は正でなければならない")
        if sum(p for p, _ in self.levels) != 1:
            raise InvalidMixtureError(f"Σ p_l が 1 でない: {sum(p for p, _ in self.levels)}")
        ys = [y for _, y in self.levels]
        if ys[0] < 0 or any(b <= a for a, b in zip(ys, ys[1:])):
            raise InvalidMixtureError(f"y_l は非負かつ狭義単調増加: {ys}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[ProbabilityLike, int]]) -> "WaitingTimeLaw":
        return cls(tuple((_to_fraction(p), int(y)) for p, y in pairs))

    @property
    def L(self) -> int:
        return len(self.levels)

    def p(self, level: int) -> Fraction:
        """p_level（1 始まり）"""
        self._check_level(level)
        return self.levels[level - 1][0]

    def y(self, level: int) -> int:
        """y_level（1 始まり）"""
        self._check_level(level)
        return self.levels[level - 1][1]

    def z(self, k: int) -> Fraction:
        """z_k = Σ_{l<=k} p_l"""
        self._check_level(k)
        return sum((p for p, _ in self.levels[:k]), Fraction(0))

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([float(p) for p, _ in self.levels])

    @property
    def heights(self) -> np.ndarray:
        return np.array([y for _, y in self.levels], dtype=np.int64)

    def _check_level(self, k: int):
        if not 1 <= k <= self.L:
            raise LevelOutOfRangeError(f"レベル {k} が範囲 1..{self.L} の外")

    def __str__(self) -> str:
        return ",".join(f"{p}:{y}" for p, y in self.levels)


def law_from_spec(text: str) -> WaitingTimeLaw:
    """
    "3/4:1,1/4:3" 形式の文字列から構築

    Raises:
        InvalidMixtureError: 書式または確率が不正
    """
    pairs: List[Tuple[Fraction, int]] = []
    try:
        for chunk in text.split(","):
            p, y = chunk.strip().split(":")
            pairs.append((_to_fraction(p.strip()), int(y)))
    except ValueError as e:
        raise InvalidMixtureError(f"分布指定が読めない: {text!r}") from e
    return WaitingTimeLaw.from_pairs(pairs)


def truncated_law(law: WaitingTimeLaw, k: int) -> WaitingTimeLaw:
    """最初の k レベルを z_k で正規化した分布"""
    z = law.z(k)
    return WaitingTimeLaw(tuple((p / z, y) for p, y in law.levels[:k]))


def as_pmf(law: WaitingTimeLaw, mode: PMFMode = PMFMode.EXACT) -> LatticePMF:
    """
    混合 Σ p_l·R[0, y_l] の確率質量関数

    P(T = t) = Σ_{l: y_l >= t} p_l/(y_l + 1) なので重みは非増加。
    """
    top = law.y(law.L)
    _check_cap(top + 1)
    # 差分配列で各レベルの一様成分を加える
    if mode == PMFMode.EXACT:
        diff: List[Fraction] = [Fraction(0)] * (top + 2)
        for p, y in law.levels:
            share = p / (y + 1)
            diff[0] += share
            diff[y + 1] -= share
        weights = []
        running = Fraction(0)
        for t in range(top + 1):
            running += diff[t]
            weights.append(running)
        return LatticePMF.from_weights(0, weights, PMFMode.EXACT)

    diff_f = np.zeros(top + 2)
    for p, y in law.levels:
        share = float(p) / (y + 1)
        diff_f[0] += share
        diff_f[y + 1] -= share
    weights_f = np.clip(np.cumsum(diff_f[:-1]), 0.0, None)
    return LatticePMF.from_weights(0, weights_f, PMFMode.FLOAT, renormalize=True)
