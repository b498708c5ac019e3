"""
ウォークの推定式のチェック

- 分位点による符号反転確率の下界
- 2 レベル分布での回帰確率の再帰評価
- 級数の部分和、対数級数の恒等式、|X| の裾の下界、ℓ² 再帰の診断
"""

import math
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

import mpmath
import numpy as np

from ..config import settings
from ..distributions import (
    LatticePMF,
    PMFMode,
    convolution_power,
    convolve,
    interval_mass,
    law_of_X,
    to_floating,
    zero_mass,
)
from ..exceptions import ExactComputationOverflow, PreconditionViolation, SupportOverflowError
from ..hierarchy import WaitingTimeLaw, as_pmf, compute_A, truncated_law
from ..logger import logger
from ..walks import sample_increments, sample_position_batch, sign_change_mask
from .estimates import MIN_REPLICAS, EstimateWithCI
from .fitting import SamplePoint


# ======================
# 分位点の下界
# ======================


class QuantileBoundResult(NamedTuple):
    lhs: EstimateWithCI  # P(S_n S_{n+1} < 0)
    rhs: EstimateWithCI  # (α/2) P(0 < |S_n| <= γ)
    gamma: int
    literal_rhs: EstimateWithCI  # (α/2) P(|S_n| <= q)
    quantile: int
    holds: bool
    literal_holds: bool


def abs_quantile(law: LatticePMF, alpha: float) -> int:
    """|X| の下側 (1-α) 分位点 q = min{t : P(|X| <= t) >= 1-α}"""
    if not 0 < alpha < 1:
        raise PreconditionViolation(f"α は (0, 1): {alpha}")
    p = to_floating(law)
    target = 1 - alpha - settings.float_tolerance
    bound = max(abs(p.support_min), abs(p.support_max))
    mass = 0.0
    for t in range(0, bound + 1):
        mass += p.prob(t) + (p.prob(-t) if t else 0.0)
        if mass >= target:
            return t
    return bound


def check_quantile_bound(
    x_law: LatticePMF,
    alpha: float,
    n: int,
    replicas: int,
    rng: np.random.Generator,
    slack: float = 0.0,
    confidence: Optional[float] = None,
) -> QuantileBoundResult:
    """
    P(S_n S_{n+1} < 0) >= (α/2) P(0 < |S_n| <= γ) の確認

    γ は |X| の (1-α) 分位点 q より真に小さい最大の整数。このとき P(|X| > γ) > α で、
    S_n と逆向きに |S_n| を超えて跳ぶ確率は α/2 を超える。
    S_n = 0 を含む字義どおりの形 (α/2) P(|S_n| <= q) は診断値として並記する。
    """
    if replicas < MIN_REPLICAS:
        raise PreconditionViolation(f"replicas は {MIN_REPLICAS} 以上: {replicas}")
    q = abs_quantile(x_law, alpha)
    gamma = q - 1
    half = alpha / 2

    if zero_mass(x_law) == 1:
        zero = EstimateWithCI.exact(0.0, replicas)
        literal = EstimateWithCI.exact(half, replicas)
        return QuantileBoundResult(zero, zero, gamma, literal, q, True, False)

    s0, s1 = sample_position_batch(x_law, 1, n, replicas, rng)
    a, b = s0[:, 0], s1[:, 0]
    lhs = EstimateWithCI.from_counts(int(sign_change_mask(a, b).sum()), replicas, confidence)
    near = (np.abs(a) > 0) & (np.abs(a) <= gamma)
    rhs = EstimateWithCI.from_counts(int(near.sum()), replicas, confidence).scaled(half)
    literal = EstimateWithCI.from_counts(int((np.abs(a) <= q).sum()), replicas, confidence).scaled(half)
    return QuantileBoundResult(
        lhs,
        rhs,
        gamma,
        literal,
        q,
        lhs.ci_hi >= rhs.ci_lo * (1 - slack),
        lhs.ci_hi >= literal.ci_lo * (1 - slack),
    )


# ======================
# 2 レベルの再帰評価
# ======================


class Qkn2Row(NamedTuple):
    n: int
    s1: float
    s2: EstimateWithCI
    s2_exact: Optional[float]
    bound: float
    holds: bool
    escalated: bool


def _require_two_levels(law: WaitingTimeLaw):
    if law.L != 2:
        raise PreconditionViolation(f"2 レベルの分布が必要: L={law.L}")
    if law.p(2) <= 0:
        raise PreconditionViolation("p_2 = 0 は退化した入力")


def return_probabilities(step: LatticePMF, n_values: Sequence[int]) -> List[float]:
    """
    P(S_n = 0) を畳み込みで求める（浮動小数点）

    Raises:
        ExactComputationOverflow: 台が上限を超える
    """
    try:
        base = to_floating(step)
        return [float(convolution_power(base, n).prob(0)) for n in n_values]
    except SupportOverflowError as exc:
        raise ExactComputationOverflow(f"s_n の厳密計算ができない: {exc}") from exc


def sign_change_probability(step: LatticePMF, n: int) -> float:
    """P(S_n S_{n+1} < 0) を S_n の分布と増分の累積分布から求める"""
    x_law = to_floating(step)
    s_law = convolution_power(x_law, n)
    cum = np.concatenate(([0.0], np.cumsum(x_law.as_array())))

    def cdf(t: np.ndarray) -> np.ndarray:
        # P(X <= t)
        return cum[np.clip(t - x_law.offset + 1, 0, len(x_law))]

    xs = s_law.support()
    ws = s_law.as_array()
    pos, neg = xs > 0, xs < 0
    total = np.dot(ws[pos], cdf(-xs[pos] - 1)) + np.dot(ws[neg], 1 - cdf(-xs[neg]))
    return float(total)


def qkn2_bound(law: WaitingTimeLaw, A: float, n: int, s1: float) -> float:
    """s_n^1 (1-p_2)^n + A/(p_2 y_2)/√n"""
    p2 = float(law.p(2))
    return s1 * (1 - p2) ** n + A / (p2 * law.y(2)) / math.sqrt(n)


def _estimate_s2(law: WaitingTimeLaw, n: int, replicas: int, rng: np.random.Generator, confidence) -> EstimateWithCI:
    hits = 0
    done = 0
    chunk = max(1, settings.block_size // max(n, 1))
    while done < replicas:
        m = min(chunk, replicas - done)
        steps = sample_increments(law, m * n, rng, K=2).values.reshape(m, n)
        hits += int(np.sum(steps.sum(axis=1) == 0))
        done += m
    return EstimateWithCI.from_counts(hits, replicas, confidence)


def check_qkn2(
    law: WaitingTimeLaw,
    A: Optional[float],
    n_grid: Sequence[int],
    replicas: int,
    rng: np.random.Generator,
    g_max: Optional[int] = None,
    exact_oracle: bool = True,
    confidence: Optional[float] = None,
) -> List[Qkn2Row]:
    """
    s_n^2 <= s_n^1 (1-p_2)^n + (A/(p_2 y_2)) n^{-1/2} の確認

    s_n^1 は R[0,y_1] から作る X^{(1)} の畳み込みで求め、s_n^2 は打ち切り結合の
    サンプラーで推定する。区間上限が上界を超えた n は replicas を 10 倍にして 1 度だけ再推定する。
    exact_oracle=True なら s_n^2 の畳み込み値も並記する。
    """
    _require_two_levels(law)
    if any(n < 1 for n in n_grid):
        raise PreconditionViolation(f"n は 1 以上: {list(n_grid)}")
    A = compute_A() if A is None else A
    g_max = g_max or settings.g_max
    level1 = law_of_X(as_pmf(truncated_law(law, 1), PMFMode.FLOAT), g_max).law
    s1_values = return_probabilities(level1, n_grid)

    s2_exact: List[Optional[float]] = [None] * len(n_grid)
    if exact_oracle:
        level2 = law_of_X(as_pmf(law, PMFMode.FLOAT), g_max).law
        try:
            s2_exact = list(return_probabilities(level2, n_grid))
        except ExactComputationOverflow as exc:
            logger.warn(f"qkn2: s_n^2 の畳み込みを省略: {exc}")

    rows = []
    for n, s1, exact in zip(n_grid, s1_values, s2_exact):
        bound = qkn2_bound(law, A, n, s1)
        estimate = _estimate_s2(law, n, replicas, rng, confidence)
        escalated = False
        if estimate.ci_hi > bound:
            logger.warn(f"qkn2: n={n} で区間上限 {estimate.ci_hi:.3e} > {bound:.3e}、replicas を 10 倍で再推定")
            estimate = _estimate_s2(law, n, replicas * 10, rng, confidence)
            escalated = True
        rows.append(Qkn2Row(n, s1, estimate, exact, bound, estimate.ci_hi <= bound, escalated))
        logger.debug(f"qkn2 n={n}: s1={s1:.4e} s2={estimate.point:.4e} bound={bound:.4e}")
    return rows


# ======================
# 級数
# ======================


class SeriesRow(NamedTuple):
    n: int
    sum_sq: float
    sum_sq_lo: float
    sum_sq_hi: float
    sum_cross: Optional[float]
    sum_cross_lo: Optional[float]
    sum_cross_hi: Optional[float]


def _interpolate(points: Sequence[SamplePoint], ns: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """log-log の区分線形補間で (p, lo, hi) を ns 上に展開"""
    pts = sorted(points)
    x = np.log([n for n, _, _ in pts])
    tiny = np.finfo(np.float64).tiny

    def interp(values):
        logs = np.log(np.maximum(np.asarray(values, dtype=np.float64), tiny))
        return np.exp(np.interp(np.log(ns), x, logs))

    return (
        interp([p for _, p, _ in pts]),
        interp([ci[0] for _, _, ci in pts]),
        interp([ci[1] for _, _, ci in pts]),
    )


def series_partial_sums(
    return_points: Sequence[SamplePoint],
    sign_points: Optional[Sequence[SamplePoint]] = None,
) -> List[SeriesRow]:
    """
    Σ P(S_n=0)^2 と Σ P(S_n=0)·P(S_n S_{n+1}<0) の部分和（診断用）

    グリッドの最小 n から最大 n まで、間の n は log-log 補間する。
    区間は下端同士・上端同士の積の和で伝播する。
    """
    if len(return_points) < 2:
        raise PreconditionViolation("2 点以上の推定が必要")
    lo_n = min(n for n, _, _ in return_points)
    hi_n = max(n for n, _, _ in return_points)
    ns = np.arange(lo_n, hi_n + 1, dtype=np.float64)
    p, p_lo, p_hi = _interpolate(return_points, ns)
    sq, sq_lo, sq_hi = np.cumsum(p * p), np.cumsum(p_lo * p_lo), np.cumsum(p_hi * p_hi)

    cross: Tuple[Optional[np.ndarray], ...] = (None, None, None)
    if sign_points:
        q, q_lo, q_hi = _interpolate(sign_points, ns)
        cross = (np.cumsum(p * q), np.cumsum(p_lo * q_lo), np.cumsum(p_hi * q_hi))

    rows = []
    for i, n in enumerate(ns.astype(np.int64)):
        c = [None if arr is None else float(arr[i]) for arr in cross]
        rows.append(SeriesRow(int(n), float(sq[i]), float(sq_lo[i]), float(sq_hi[i]), c[0], c[1], c[2]))
    return rows


class LogSeriesResult(NamedTuple):
    q: float
    series: float
    closed_form: float
    holds: bool


def check_log_series(q: float, tol: float = 1e-10) -> LogSeriesResult:
    """Σ_{n>=1} (1/n)(1-q)^n = log(1/q)"""
    if not 0 < q < 1:
        raise PreconditionViolation(f"0 < q < 1: {q}")
    with mpmath.workdps(settings.mp_dps):
        r = 1 - mpmath.mpf(q)
        series = mpmath.nsum(lambda n: r**n / n, [1, mpmath.inf])
        closed = mpmath.log(1 / mpmath.mpf(q))
        holds = abs(series - closed) <= tol
    return LogSeriesResult(q, float(series), float(closed), bool(holds))


# ======================
# |X| の裾と ℓ² 再帰
# ======================


class TailBoundResult(NamedTuple):
    k: int
    c: int
    lhs: Fraction  # P(c <= |X|)
    rhs: Fraction  # (2/3) p_k (1 - c/y_k)
    holds: bool


def check_tail_bound(law: WaitingTimeLaw, k: int, c: int, g_max: Optional[int] = None) -> TailBoundResult:
    """P(c <= |X|) >= (2/3) p_k (1 - c/y_k)（X は law から作る厳密分布）"""
    if c < 1:
        raise PreconditionViolation(f"c は 1 以上: {c}")
    x_law = law_of_X(as_pmf(law, PMFMode.EXACT), g_max).law
    lhs = 1 - Fraction(interval_mass(x_law, c))
    rhs = Fraction(2, 3) * law.p(k) * (1 - Fraction(c, law.y(k)))
    return TailBoundResult(k, c, lhs, rhs, lhs >= rhs)


class L2Row(NamedTuple):
    k: int
    lhs: float  # sqrt(Σ (s_n^k)^2 (1-p_{k+1})^{2n})
    rhs: float  # 2 Σ_{j<=k} 1/j^2
    step_term: Optional[float]  # sqrt((A/(p_k y_k))^2 log(1/p_{k+1}))
    tail: float  # n_max 以降の打ち切り誤差の上界
    holds: bool


def _l2_sum(step: LatticePMF, q_next: float, n_max: int) -> Tuple[float, float]:
    law = to_floating(step)
    current = law
    total = 0.0
    decay = (1 - q_next) ** 2
    for n in range(1, n_max + 1):
        total += float(current.prob(0)) ** 2 * decay**n
        current = convolve(current, law)
    tail = decay ** (n_max + 1) / (1 - decay)
    return math.sqrt(total), tail


def l2_recursion_diagnostic(
    law: WaitingTimeLaw,
    p_next: float,
    A: Optional[float] = None,
    n_max: int = 64,
    g_max: Optional[int] = None,
) -> List[L2Row]:
    """
    2 レベル分布での ℓ² 再帰の数値例（判定せず報告のみ）

    k=1 は p_2、k=2 は合成の p_next を次のレベルの確率として使う。
    """
    _require_two_levels(law)
    if not 0 < p_next < 1:
        raise PreconditionViolation(f"0 < p_next < 1: {p_next}")
    A = compute_A() if A is None else A
    g_max = g_max or settings.g_max

    level1 = law_of_X(as_pmf(truncated_law(law, 1), PMFMode.FLOAT), g_max).law
    level2 = law_of_X(as_pmf(law, PMFMode.FLOAT), g_max).law
    p2 = float(law.p(2))

    lhs1, tail1 = _l2_sum(level1, p2, n_max)
    lhs2, tail2 = _l2_sum(level2, p_next, n_max)
    step = math.sqrt((A / (p2 * law.y(2))) ** 2 * math.log(1 / p_next))
    return [
        L2Row(1, lhs1, 2.0, None, tail1, lhs1 <= 2.0),
        L2Row(2, lhs2, 2.5, step, tail2, lhs2 <= 2.5),
    ]
