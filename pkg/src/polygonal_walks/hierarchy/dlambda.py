"""
D_λ 領域の確率 1 - (1 - sup_t P(|εT - t| <= λ))^(d-1)
"""

from fractions import Fraction
from typing import NamedTuple

from ..distributions import concentration, mix, reflect
from ..exceptions import PreconditionViolation
from .waiting_time import WaitingTimeLaw, as_pmf


class DLambdaResult(NamedTuple):
    sup_probability: Fraction
    value: Fraction
    non_degenerate: bool


def dlambda_sup(law: WaitingTimeLaw, lam, d: int) -> DLambdaResult:
    """
    sup_t P(|εT - t| <= λ) を厳密に求め、d-1 個の垂直成分の式を返す

    長さ 2λ の閉区間の最大質量は、格子点または中点を中心とする
    窓（連続 floor(2λ)+1 原子）で達成されるので集中関数と一致する。
    """
    if not lam > 0:
        raise PreconditionViolation(f"λ は正: {lam}")
    if d < 3:
        raise PreconditionViolation(f"次元は 3 以上: {d}")
    tau = as_pmf(law)
    symmetric = mix([(Fraction(1, 2), tau), (Fraction(1, 2), reflect(tau))])
    sup_prob = concentration(symmetric, 2 * lam)
    value = 1 - (1 - sup_prob) ** (d - 1)
    return DLambdaResult(sup_prob, value, value < 1)
