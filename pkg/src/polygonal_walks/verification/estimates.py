"""
事象確率のモンテカルロ推定（Wilson 区間つき）
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..distributions import LatticePMF, zero_mass
from ..exceptions import PreconditionViolation
from ..walks import (
    Box,
    EventKind,
    box_visit_mask,
    interval_hit_mask,
    level_crossing_mask,
    return_mask,
    sample_position_batch,
    segment_hit_mask,
    sign_change_mask,
    vn_mask,
)
from .statistics import wilson_interval

MIN_REPLICAS = 100


@dataclass(frozen=True)
class EstimateWithCI:
    point: float
    ci_lo: float
    ci_hi: float
    replicas: int
    successes: int
    seed: Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.ci_lo <= self.point <= self.ci_hi <= 1:
            raise PreconditionViolation(f"区間が不正: {self.ci_lo} <= {self.point} <= {self.ci_hi}")

    @classmethod
    def from_counts(
        cls, successes: int, replicas: int, confidence: Optional[float] = None, seed: Optional[str] = None
    ) -> "EstimateWithCI":
        lo, hi = wilson_interval(successes, replicas, confidence)
        return cls(successes / replicas, lo, hi, replicas, successes, seed)

    @classmethod
    def exact(cls, value: float, replicas: int = 0, seed: Optional[str] = None) -> "EstimateWithCI":
        """シミュレーションなしの確定値"""
        return cls(value, value, value, replicas, 0, seed)

    def scaled(self, factor: float) -> "EstimateWithCI":
        """factor 倍した推定（0 <= factor <= 1）"""
        return EstimateWithCI(
            self.point * factor, self.ci_lo * factor, self.ci_hi * factor, self.replicas, self.successes, self.seed
        )


@dataclass(frozen=True)
class EventSpec:
    """
    事象の指定

    kind ごとに使うフィールド:
        return: なし / sign_change: coord / level_crossing: coord, level /
        interval_hit: coord, lo, hi / box_visit, segment_hit: box / V_n: なし（d = 2）
    """

    kind: EventKind
    increment: LatticePMF
    d: int = 1
    coord: int = 0
    level: float = 1.0
    lo: float = -1.0
    hi: float = 1.0
    box: Optional[Box] = None

    def __post_init__(self):
        if self.d < 1 or not 0 <= self.coord < self.d:
            raise PreconditionViolation(f"d={self.d}, coord={self.coord} が不正")
        if self.kind == EventKind.V_N and self.d != 2:
            raise PreconditionViolation("V_n は d = 2 のみ")
        if self.kind in (EventKind.BOX_VISIT, EventKind.SEGMENT_HIT):
            if self.box is None or self.box.dim != self.d:
                raise PreconditionViolation(f"{self.kind.value} には d 次元の box が必要")

    def evaluate(self, s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
        """(m, d) の S_n, S_{n+1} から事象の成否 (m,) を返す"""
        c = self.coord
        if self.kind == EventKind.RETURN:
            return return_mask(s0)
        if self.kind == EventKind.SIGN_CHANGE:
            return sign_change_mask(s0[:, c], s1[:, c])
        if self.kind == EventKind.LEVEL_CROSSING:
            return level_crossing_mask(s0[:, c], s1[:, c], self.level)
        if self.kind == EventKind.INTERVAL_HIT:
            return interval_hit_mask(s0[:, c], s1[:, c], self.lo, self.hi)
        if self.kind == EventKind.BOX_VISIT:
            return box_visit_mask(s0, self.box)
        if self.kind == EventKind.V_N:
            return vn_mask(s0, s1)
        return segment_hit_mask(s0, s1, self.box)

    @property
    def degenerate(self) -> bool:
        """増分が恒等的に 0"""
        return zero_mass(self.increment) == 1


def count_event(spec: EventSpec, n: int, size: int, rng: np.random.Generator) -> int:
    """size 組の (S_n, S_{n+1}) で事象が起きた数"""
    s0, s1 = sample_position_batch(spec.increment, spec.d, n, size, rng)
    return int(spec.evaluate(s0, s1).sum())


def degenerate_value(spec: EventSpec) -> float:
    """恒等的に 0 のウォークでの事象の値（0 または 1）"""
    origin = np.zeros((1, spec.d), dtype=np.int64)
    return float(spec.evaluate(origin, origin)[0])


def estimate_event_prob(
    spec: EventSpec,
    n: int,
    replicas: int,
    rng: np.random.Generator,
    confidence: Optional[float] = None,
    seed: Optional[str] = None,
) -> EstimateWithCI:
    """
    時刻 n の事象確率を replicas 回の独立な (S_n, S_{n+1}) で推定

    Raises:
        PreconditionViolation: replicas < 100 または n < 0
    """
    if replicas < MIN_REPLICAS:
        raise PreconditionViolation(f"replicas は {MIN_REPLICAS} 以上: {replicas}")
    if n < 0:
        raise PreconditionViolation(f"n は 0 以上: {n}")
    if spec.degenerate:
        return EstimateWithCI.exact(degenerate_value(spec), replicas, seed)
    return EstimateWithCI.from_counts(count_event(spec, n, replicas, rng), replicas, confidence, seed)
