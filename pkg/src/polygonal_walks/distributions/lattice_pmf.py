"""
整数格子上の確率質量関数（LatticePMF）

厳密モード（Fraction）と浮動小数点モード（numpy）の二重演算。
畳み込み・反転・モーメント・単峰性判定・集中関数・増分 X の厳密分布を提供する。
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import settings
from ..exceptions import (
    InvalidDistributionError,
    InvalidIntervalError,
    InvalidMixtureError,
    PreconditionViolation,
    SupportOverflowError,
)

Weight = Union[Fraction, float]


class PMFMode(str, Enum):
    """重みの演算モード"""

    EXACT = "exact"
    FLOAT = "float"


@dataclass(frozen=True, eq=False)
class LatticePMF:
    """
    有限台の整数値確率分布

    weights[i] は offset + i の確率。厳密モードでは Fraction のタプル、
    浮動小数点モードでは読み取り専用の float64 配列を保持する。
    """

    offset: int
    weights: Union[Tuple[Fraction, ...], np.ndarray]
    mode: PMFMode = PMFMode.EXACT

    def __post_init__(self):
        if len(self.weights) == 0:
            raise InvalidDistributionError("空の確率質量関数")
        first, last = self.weights[0], self.weights[-1]
        if not (first > 0 and last > 0):
            raise InvalidDistributionError("台の両端の重みは正でなければならない")
        if self.mode == PMFMode.EXACT:
            if any(w < 0 for w in self.weights):
                raise InvalidDistributionError("負の重み")
            if sum(self.weights) != 1:
                raise InvalidDistributionError(f"重みの総和が 1 でない: {sum(self.weights)}")
        else:
            if np.any(self.weights < 0):
                raise InvalidDistributionError("負の重み")
            total = float(np.sum(self.weights))
            if abs(total - 1.0) > settings.float_tolerance:
                raise InvalidDistributionError(f"重みの総和が 1 でない: {total!r}")

    @classmethod
    def from_weights(
        cls,
        offset: int,
        weights: Iterable,
        mode: Optional[PMFMode] = None,
        renormalize: bool = False,
    ) -> "LatticePMF":
        """
        重み列から構築（両端のゼロを削って台を詰める）

        Args:
            offset: weights[0] に対応する整数
            weights: 非負の重み列
            mode: 省略時は重みの型から推定（float が混ざれば浮動小数点）
            renormalize: 浮動小数点モードで総和を 1 に正規化する

        Returns:
            LatticePMF
        """
        values = list(weights)
        if mode is None:
            mode = (
                PMFMode.FLOAT
                if any(isinstance(w, (float, np.floating)) for w in values)
                else PMFMode.EXACT
            )
        lo = 0
        hi = len(values)
        while lo < hi and values[lo] == 0:
            lo += 1
        while hi > lo and values[hi - 1] == 0:
            hi -= 1
        if lo == hi:
            raise InvalidDistributionError("全ての重みがゼロ")
        trimmed = values[lo:hi]
        if mode == PMFMode.EXACT:
            return cls(int(offset) + lo, tuple(_as_fraction(w) for w in trimmed), mode)
        arr = np.asarray([float(w) for w in trimmed], dtype=np.float64)
        if renormalize:
            arr = arr / arr.sum()
        arr.setflags(write=False)
        return cls(int(offset) + lo, arr, mode)

    @property
    def support_min(self) -> int:
        return self.offset

    @property
    def support_max(self) -> int:
        return self.offset + len(self.weights) - 1

    def __len__(self) -> int:
        return len(self.weights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticePMF):
            return NotImplemented
        if self.mode != other.mode or self.offset != other.offset:
            return False
        if len(self.weights) != len(other.weights):
            return False
        if self.mode == PMFMode.EXACT:
            return self.weights == other.weights
        return bool(np.array_equal(self.weights, other.weights))

    __hash__ = None  # type: ignore[assignment]

    def items(self) -> List[Tuple[int, Weight]]:
        """(値, 重み) の一覧"""
        return [(self.offset + i, w) for i, w in enumerate(self.weights)]

    def prob(self, x: int) -> Weight:
        """P(X = x)"""
        i = x - self.offset
        if 0 <= i < len(self.weights):
            return self.weights[i]
        return Fraction(0) if self.mode == PMFMode.EXACT else 0.0

    def as_array(self) -> np.ndarray:
        """重みを float64 配列で返す（サンプリング用）"""
        if self.mode == PMFMode.FLOAT:
            return np.asarray(self.weights)
        return np.array([float(w) for w in self.weights], dtype=np.float64)

    def support(self) -> np.ndarray:
        return np.arange(self.support_min, self.support_max + 1, dtype=np.int64)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """逆関数法で size 個のサンプルを引く"""
        cdf = np.cumsum(self.as_array())
        cdf /= cdf[-1]
        idx = np.searchsorted(cdf, rng.random(size), side="right")
        return np.minimum(idx, len(cdf) - 1).astype(np.int64) + self.offset


class MomentSummary(NamedTuple):
    """平均・分散・2次モーメント"""

    mean: Weight
    variance: Weight
    second_moment: Weight


class UnimodalityReport(NamedTuple):
    """対称性と単峰性の判定結果"""

    symmetric: bool
    unimodal: bool


class LawOfX(NamedTuple):
    """X の厳密分布と G の打ち切りで捨てた確率質量"""

    law: LatticePMF
    truncation_mass: Weight


def _as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, (int, Rational)):
        return Fraction(w)
    if isinstance(w, str):
        return Fraction(w)
    raise InvalidDistributionError(f"厳密モードに浮動小数点の重みは使えない: {w!r}")


def _check_cap(n_atoms: int):
    if n_atoms > settings.max_support_atoms:
        raise SupportOverflowError(
            f"台のサイズ {n_atoms} が上限 {settings.max_support_atoms} を超える"
        )


def _exact_to_ints(weights: Sequence[Fraction]) -> Tuple[List[int], int]:
    """共通分母に揃えた整数分子と分母"""
    den = 1
    for w in weights:
        den = math.lcm(den, w.denominator)
    return [w.numerator * (den // w.denominator) for w in weights], den


def uniform_pmf(a: int, b: int, mode: PMFMode = PMFMode.EXACT) -> LatticePMF:
    """
    整数区間 [a, b] 上の一様分布 R[a, b]

    Raises:
        InvalidIntervalError: a > b
    """
    if a > b:
        raise InvalidIntervalError(f"区間が不正: a={a} > b={b}")
    n = b - a + 1
    _check_cap(n)
    if mode == PMFMode.EXACT:
        return LatticePMF(a, tuple([Fraction(1, n)] * n), mode)
    arr = np.full(n, 1.0 / n)
    arr.setflags(write=False)
    return LatticePMF(a, arr, mode)


def point_mass(c: int, mode: PMFMode = PMFMode.EXACT) -> LatticePMF:
    """点質量 δ_c"""
    return uniform_pmf(c, c, mode)


def to_floating(p: LatticePMF) -> LatticePMF:
    """厳密モードから浮動小数点モードへ変換"""
    if p.mode == PMFMode.FLOAT:
        return p
    return LatticePMF.from_weights(p.offset, p.as_array(), PMFMode.FLOAT, renormalize=True)


def mix(components: Sequence[Tuple[Weight, LatticePMF]]) -> LatticePMF:
    """
    凸結合 Σ w_i·P_i

    Raises:
        InvalidMixtureError: 重みが負、または総和が 1 から外れる
    """
    if not components:
        raise InvalidMixtureError("空の混合")
    exact = all(
        law.mode == PMFMode.EXACT and not isinstance(w, (float, np.floating))
        for w, law in components
    )
    if any(w < 0 for w, _ in components):
        raise InvalidMixtureError("負の混合重み")
    if exact:
        total = sum(_as_fraction(w) for w, _ in components)
        if total != 1:
            raise InvalidMixtureError(f"混合重みの総和が 1 でない: {total}")
    else:
        total = math.fsum(float(w) for w, _ in components)
        if abs(total - 1.0) > settings.float_tolerance:
            raise InvalidMixtureError(f"混合重みの総和が 1 でない: {total!r}")

    active = [(w, law) for w, law in components if w != 0]
    lo = min(law.support_min for _, law in active)
    hi = max(law.support_max for _, law in active)
    _check_cap(hi - lo + 1)

    if exact:
        dense = [Fraction(0)] * (hi - lo + 1)
        for w, law in active:
            wf = _as_fraction(w)
            base = law.offset - lo
            for i, x in enumerate(law.weights):
                dense[base + i] += wf * x
        return LatticePMF.from_weights(lo, dense, PMFMode.EXACT)

    dense_f = np.zeros(hi - lo + 1)
    for w, law in active:
        base = law.offset - lo
        dense_f[base : base + len(law)] += float(w) * law.as_array()
    return LatticePMF.from_weights(lo, dense_f, PMFMode.FLOAT, renormalize=True)


def convolve(p: LatticePMF, q: LatticePMF) -> LatticePMF:
    """
    独立和の分布 p * q

    Raises:
        SupportOverflowError: 結果の台が上限を超える
    """
    n_atoms = len(p) + len(q) - 1
    _check_cap(n_atoms)
    offset = p.offset + q.offset

    if p.mode == PMFMode.EXACT and q.mode == PMFMode.EXACT:
        a, da = _exact_to_ints(p.weights)
        b, db = _exact_to_ints(q.weights)
        short, long_ = (a, b) if len(a) <= len(b) else (b, a)
        out = [0] * n_atoms
        for i, x in enumerate(short):
            if x:
                for j, y in enumerate(long_):
                    out[i + j] += x * y
        den = da * db
        return LatticePMF.from_weights(offset, [Fraction(v, den) for v in out], PMFMode.EXACT)

    result = np.convolve(p.as_array(), q.as_array())
    # 丸め誤差で負になった値を落とす
    np.clip(result, 0.0, None, out=result)
    return LatticePMF.from_weights(offset, result, PMFMode.FLOAT, renormalize=True)


def convolution_power(p: LatticePMF, m: int) -> LatticePMF:
    """m 回畳み込み（二乗法）。m = 0 は δ₀"""
    if m < 0:
        raise PreconditionViolation(f"m は非負: {m}")
    _check_cap(m * (len(p) - 1) + 1)
    result = point_mass(0, p.mode)
    base = p
    while m:
        if m & 1:
            result = convolve(result, base)
        m >>= 1
        if m:
            base = convolve(base, base)
    return result


def reflect(p: LatticePMF) -> LatticePMF:
    """-X の分布"""
    weights = p.weights[::-1]
    if p.mode == PMFMode.FLOAT:
        weights = np.array(weights)
        weights.setflags(write=False)
    return LatticePMF(-p.support_max, weights, p.mode)


def moments(p: LatticePMF) -> MomentSummary:
    """平均・分散・2次モーメント（厳密モードでは厳密値）"""
    if p.mode == PMFMode.EXACT:
        mean = sum((Fraction(x) * w for x, w in p.items()), Fraction(0))
        second = sum((Fraction(x * x) * w for x, w in p.items()), Fraction(0))
        return MomentSummary(mean, second - mean * mean, second)
    xs = p.support().astype(np.float64)
    w = p.as_array()
    mean_f = float(np.dot(xs, w))
    second_f = float(np.dot(xs * xs, w))
    return MomentSummary(mean_f, max(second_f - mean_f * mean_f, 0.0), second_f)


def _leq(a: Weight, b: Weight, exact: bool) -> bool:
    if exact:
        return a <= b
    return a <= b + settings.float_tolerance


def is_symmetric_unimodal(p: LatticePMF) -> UnimodalityReport:
    """
    対称性と（0 を中心とする）単峰性の判定

    単峰性: |x| が 0 から離れる方向に重みが非増加（等号は許す）。
    """
    exact = p.mode == PMFMode.EXACT
    if exact:
        symmetric = p.offset == -p.support_max and p.weights == p.weights[::-1]
    else:
        symmetric = p.offset == -p.support_max and bool(
            np.allclose(p.weights, p.weights[::-1], rtol=0.0, atol=settings.float_tolerance)
        )

    unimodal = True
    for x in range(0, max(p.support_max, 0)):
        if not _leq(p.prob(x + 1), p.prob(x), exact):
            unimodal = False
            break
    if unimodal:
        for x in range(0, min(p.support_min, 0), -1):
            if not _leq(p.prob(x - 1), p.prob(x), exact):
                unimodal = False
                break
    return UnimodalityReport(symmetric, unimodal)


def max_point_prob(p: LatticePMF) -> Weight:
    """最大の一点確率"""
    if p.mode == PMFMode.EXACT:
        return max(p.weights)
    return float(np.max(p.weights))


def interval_mass(p: LatticePMF, c) -> Weight:
    """μ({x : |x| < c})（狭義の不等号）"""
    if not c > 0:
        raise PreconditionViolation(f"c は正: {c}")
    m = math.ceil(c) - 1
    total = sum((w for x, w in p.items() if -m <= x <= m), Fraction(0))
    return total if p.mode == PMFMode.EXACT else float(total)


def concentration(p: LatticePMF, lam) -> Weight:
    """
    集中関数 Q(p; λ) = sup_x p([x, x+λ])

    格子上では長さ λ の閉区間が含む連続原子数は floor(λ)+1。
    """
    if lam < 0:
        raise PreconditionViolation(f"λ は非負: {lam}")
    k = min(math.floor(lam) + 1, len(p))
    if p.mode == PMFMode.EXACT:
        window = sum(p.weights[:k], Fraction(0))
        best = window
        for i in range(k, len(p)):
            window += p.weights[i] - p.weights[i - k]
            best = max(best, window)
        return best
    csum = np.concatenate(([0.0], np.cumsum(p.as_array())))
    return float(np.max(csum[k:] - csum[:-k]))


def prob_abs_greater(p: LatticePMF, g) -> Weight:
    """P(|X| > g)"""
    total = sum((w for x, w in p.items() if abs(x) > g), Fraction(0))
    return total if p.mode == PMFMode.EXACT else float(total)


def zero_mass(p: LatticePMF) -> Weight:
    """δ = P(X = 0)"""
    return p.prob(0)


def geometric_weights(g_max: int) -> List[Tuple[int, Fraction]]:
    """
    打ち切って正規化した G の分布 P(G=g) = (2/3)(1/3)^(g-1), g = 1..g_max
    """
    if g_max < 1:
        raise PreconditionViolation(f"g_max は 1 以上: {g_max}")
    kept = 1 - Fraction(1, 3) ** g_max
    return [
        (g, Fraction(2, 3) * Fraction(1, 3) ** (g - 1) / kept) for g in range(1, g_max + 1)
    ]


def truncated_geometric_moments(g_max: int) -> Tuple[Fraction, Fraction]:
    """打ち切り G の (E G, P(G 奇数))"""
    weights = geometric_weights(g_max)
    mean = sum((g * w for g, w in weights), Fraction(0))
    odd = sum((w for g, w in weights if g % 2 == 1), Fraction(0))
    return mean, odd


def _require_nonnegative_support(tau: LatticePMF):
    if tau.support_min < 0:
        raise PreconditionViolation("τ は非負整数上の分布でなければならない")


def _symmetrize(law: LatticePMF) -> LatticePMF:
    half: Weight = Fraction(1, 2) if law.mode == PMFMode.EXACT else 0.5
    return mix([(half, law), (half, reflect(law))])


def alternating_sum_law(tau: LatticePMF, g: int) -> LatticePMF:
    """
    G = g を条件とした ε·Σ_{i=1..g} (-1)^i T_i の厳密分布

    奇数番目の項は -T、偶数番目は +T。最後に符号 ε で対称化する。
    """
    _require_nonnegative_support(tau)
    if g < 1:
        raise PreconditionViolation(f"g は 1 以上: {g}")
    odd_terms = (g + 1) // 2
    even_terms = g // 2
    signed_sum = convolve(
        convolution_power(reflect(tau), odd_terms), convolution_power(tau, even_terms)
    )
    return _symmetrize(signed_sum)


def law_of_X(tau: LatticePMF, g_max: Optional[int] = None) -> LawOfX:
    """
    X = ε Σ_{i=1}^{G} (-1)^i T_i の厳密分布（G は g_max で打ち切り正規化）

    Args:
        tau: 待ち時間 T の分布（非負整数上）
        g_max: G の打ち切り（省略時 settings.g_max）

    Returns:
        LawOfX(law, truncation_mass)  truncation_mass = (1/3)^g_max
    """
    _require_nonnegative_support(tau)
    g_max = g_max or settings.g_max
    exact = tau.mode == PMFMode.EXACT
    reflected = reflect(tau)

    components = []
    partial = point_mass(0, tau.mode)
    for g, weight in geometric_weights(g_max):
        partial = convolve(partial, reflected if g % 2 == 1 else tau)
        components.append((weight if exact else float(weight), _symmetrize(partial)))

    tail = Fraction(1, 3) ** g_max
    return LawOfX(mix(components), tail if exact else float(tail))
