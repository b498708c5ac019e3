"""
箱と線分の交差判定（スラブ法）

スカラー版は Fraction による厳密判定。配列版は float64 の除算で判定するが、
小さな整数端点では同じ有理数が同じ float に丸められるため境界も正しく分類される。
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from ..exceptions import PreconditionViolation


@dataclass(frozen=True)
class Box:
    """座標ごとの閉区間 [lo_i, hi_i] の直積"""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise PreconditionViolation("lo と hi の次元が違う")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise PreconditionViolation(f"lo <= hi でない: {self.lo} {self.hi}")

    @classmethod
    def cube(cls, dim: int, radius: float = 1) -> "Box":
        """[-radius, radius]^dim"""
        return cls(tuple([-radius] * dim), tuple([radius] * dim))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, point: Sequence) -> bool:
        return all(a <= x <= b for x, a, b in zip(point, self.lo, self.hi))


def _check_dims(p0: Sequence, p1: Sequence, box: Box):
    if not len(p0) == len(p1) == box.dim:
        raise PreconditionViolation(f"次元が一致しない: {len(p0)}, {len(p1)}, {box.dim}")


def segment_hits_box(p0: Sequence, p1: Sequence, box: Box) -> bool:
    """
    閉線分 [p0, p1] が閉じた箱と交わるか（厳密な有理数演算）

    Raises:
        PreconditionViolation: 次元不一致
    """
    _check_dims(p0, p1, box)
    t_lo, t_hi = Fraction(0), Fraction(1)
    for a, b, lo, hi in zip(p0, p1, box.lo, box.hi):
        a, b, lo, hi = Fraction(a), Fraction(b), Fraction(lo), Fraction(hi)
        delta = b - a
        if delta == 0:
            if a < lo or a > hi:
                return False
            continue
        ta, tb = (lo - a) / delta, (hi - a) / delta
        if ta > tb:
            ta, tb = tb, ta
        t_lo = max(t_lo, ta)
        t_hi = min(t_hi, tb)
        if t_lo > t_hi:
            return False
    return True


def interval_hit_mask(a: np.ndarray, b: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """区間 [min(a,b), max(a,b)] が [lo, hi] と交わるか"""
    return (np.minimum(a, b) <= hi) & (np.maximum(a, b) >= lo)


def segment_hit_mask(p0: np.ndarray, p1: np.ndarray, box: Box) -> np.ndarray:
    """
    配列版のスラブ判定

    Args:
        p0, p1: (m, d) の端点
        box: d 次元の箱

    Returns:
        (m,) の bool 配列
    """
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    if p0.shape != p1.shape or p0.shape[-1] != box.dim:
        raise PreconditionViolation(f"次元が一致しない: {p0.shape}, {p1.shape}, {box.dim}")
    m = p0.shape[0]
    t_lo = np.zeros(m)
    t_hi = np.ones(m)
    hit = np.ones(m, dtype=bool)
    for i in range(box.dim):
        a, b = p0[:, i], p1[:, i]
        delta = b - a
        still = delta == 0
        hit &= ~still | ((a >= box.lo[i]) & (a <= box.hi[i]))
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = np.where(still, -np.inf, (box.lo[i] - a) / delta)
            tb = np.where(still, np.inf, (box.hi[i] - a) / delta)
        t_lo = np.maximum(t_lo, np.minimum(ta, tb))
        t_hi = np.minimum(t_hi, np.maximum(ta, tb))
    return hit & (t_lo <= t_hi)
