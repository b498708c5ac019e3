"""
補題の厳密オラクル

各チェックは厳密モード（Fraction）で両辺を評価し、不等式を判定する。
"""

import math
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence

from ..config import settings
from ..distributions import (
    LatticePMF,
    PMFMode,
    convolution_power,
    interval_mass,
    is_symmetric_unimodal,
    law_of_X,
    max_point_prob,
    moments,
    truncated_geometric_moments,
    uniform_pmf,
)
from ..exceptions import PreconditionViolation


class MomestResult(NamedTuple):
    lhs: Fraction  # (E T)^2
    rhs: Fraction  # (3/4) E T^2
    holds: bool
    corollary_holds: bool  # (E T)^2 <= 3 Var T


class UnimodReport(NamedTuple):
    symmetric: bool
    unimodal: bool
    var_pmf: Fraction
    var_wald: Fraction
    var_T: Fraction
    var_upper: Fraction
    wald_agrees: bool
    bounds_hold: bool

    @property
    def holds(self) -> bool:
        return self.symmetric and self.unimodal and self.wald_agrees and self.bounds_hold


class UnimodestResult(NamedTuple):
    min_ratio: float
    worst_c: float
    constant: float
    holds: bool


class MaxestCell(NamedTuple):
    y: int
    m: int
    statistic: float


class MaxestTable(NamedTuple):
    cells: List[MaxestCell]
    supremum: float


def require_nonincreasing(tau: LatticePMF):
    """
    τ が {0,1,2,...} 上で非増加の重みを持つことを確認

    Raises:
        PreconditionViolation: 負の台、または 0 から見て増加する重み
    """
    if tau.support_min < 0:
        raise PreconditionViolation("τ は非負整数上の分布でなければならない")
    weights = [tau.prob(x) for x in range(0, tau.support_max + 1)]
    tol = 0 if tau.mode == PMFMode.EXACT else settings.float_tolerance
    for a, b in zip(weights, weights[1:]):
        if b > a + tol:
            raise PreconditionViolation("τ の重みが非増加でない")


def check_momest(tau: LatticePMF) -> MomestResult:
    """
    (E T)^2 <= (3/4) E T^2 と系 (E T)^2 <= 3 Var T

    Example:
        R[0,1] -> (1/4, 3/8, True, True)
    """
    require_nonincreasing(tau)
    m = moments(tau)
    lhs = m.mean * m.mean
    rhs = Fraction(3, 4) * m.second_moment if tau.mode == PMFMode.EXACT else 0.75 * m.second_moment
    return MomestResult(lhs, rhs, lhs <= rhs, lhs <= 3 * m.variance)


def check_unimod(tau: LatticePMF, g_max: Optional[int] = None) -> UnimodReport:
    """
    X の分布の対称単峰性と分散の評価

    Var(X) を確率質量関数から直接と、Wald 型の式
    E G·Var T + P(G 奇数)(E T)^2（G は同じ g_max で打ち切り）の両方で求め、
    Var T <= Var X <= 4 E(G) Var T を確認する。
    """
    require_nonincreasing(tau)
    g_max = g_max or settings.g_max
    law = law_of_X(tau, g_max).law
    shape = is_symmetric_unimodal(law)

    mean_G, odd_G = truncated_geometric_moments(g_max)
    t = moments(tau)
    var_pmf = moments(law).variance
    exact = tau.mode == PMFMode.EXACT
    if not exact:
        mean_G, odd_G = float(mean_G), float(odd_G)
    var_wald = mean_G * t.variance + odd_G * t.mean * t.mean
    var_upper = 4 * mean_G * t.variance

    if exact:
        wald_agrees = var_pmf == var_wald
        bounds_hold = t.variance <= var_pmf <= var_upper
    else:
        tol = settings.float_tolerance * max(1.0, float(var_wald))
        wald_agrees = abs(var_pmf - var_wald) <= tol
        bounds_hold = t.variance - tol <= var_pmf <= var_upper + tol
    return UnimodReport(
        shape.symmetric, shape.unimodal, var_pmf, var_wald, t.variance, var_upper, wald_agrees, bounds_hold
    )


def discrete_unimodal_constant() -> float:
    """
    格子上の対称単峰分布に対する定数 d'

    連続版の定数 2√3/9（λ^{-1}(1-λ^{-2}) の λ=√3 での最大値）を、
    格子で区間が原子を取りこぼす分 (1 - 1/√3)·3/√10 だけ割り引く（約 0.1543）。
    """
    continuous = 2 * math.sqrt(3) / 9
    return continuous * (1 - 1 / math.sqrt(3)) * 3 / math.sqrt(10)


def check_unimodest(mu: LatticePMF, c_grid: Sequence[float]) -> UnimodestResult:
    """
    μ({|x| < c})·σ/c の c_grid 上の最小値と d' の比較

    Raises:
        PreconditionViolation: 対称単峰でない、σ = 0、c > σ のいずれか
    """
    shape = is_symmetric_unimodal(mu)
    if not (shape.symmetric and shape.unimodal):
        raise PreconditionViolation("μ は対称単峰でなければならない")
    sigma = math.sqrt(moments(mu).variance)
    if sigma == 0:
        raise PreconditionViolation("σ > 0 が必要")
    if not c_grid:
        raise PreconditionViolation("c_grid が空")

    constant = discrete_unimodal_constant()
    best, worst_c = math.inf, math.nan
    for c in c_grid:
        if not 0 < c <= sigma:
            raise PreconditionViolation(f"0 < c <= σ でない: c={c}, σ={sigma}")
        ratio = float(interval_mass(mu, c)) * sigma / c
        if ratio < best:
            best, worst_c = ratio, c
    return UnimodestResult(best, worst_c, constant, best >= constant)


def check_maxest(y_grid: Sequence[int], m_grid: Sequence[int]) -> MaxestTable:
    """
    R[0,y] の m 回畳み込みの最大一点確率 × √m·y

    Raises:
        SupportOverflowError: 畳み込みの台が上限を超える
    """
    cells = []
    for y in y_grid:
        base = uniform_pmf(0, y, PMFMode.EXACT)
        for m in m_grid:
            if m < 1:
                raise PreconditionViolation(f"m は 1 以上: {m}")
            stat = float(max_point_prob(convolution_power(base, m))) * math.sqrt(m) * y
            cells.append(MaxestCell(y, m, stat))
    return MaxestTable(cells, max((c.statistic for c in cells), default=0.0))
