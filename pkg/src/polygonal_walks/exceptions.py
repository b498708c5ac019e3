"""
例外定義

ライブラリ全体で使うエラー種別。値の検証エラーは ValueError も継承する。
"""

from typing import Any, Optional, Tuple


class PolywalkError(Exception):
    """ラボ共通の基底例外"""


class InvalidIntervalError(PolywalkError, ValueError):
    """a > b の整数区間"""


class InvalidMixtureError(PolywalkError, ValueError):
    """混合の重みが負、または総和が 1 でない"""


class InvalidDistributionError(PolywalkError, ValueError):
    """確率質量関数の不変条件違反"""


class SupportOverflowError(PolywalkError, ValueError):
    """台のサイズが上限を超えた"""


class LevelOutOfRangeError(PolywalkError, ValueError):
    """階層レベルが 1..L の範囲外"""


class SamplingRangeError(PolywalkError, ValueError):
    """サンプリング不能な大きさの y_k"""


class InfeasibleWindowError(PolywalkError):
    """パラメータ構成で反復予算内に y_k が見つからない"""


class PreconditionViolation(PolywalkError, ValueError):
    """検証関数の前提条件違反"""


class ExactComputationOverflow(PolywalkError):
    """厳密計算が上限を超えた"""


class ConfigError(PolywalkError, ValueError):
    """実行設定の誤り"""


class HypothesisViolation(PolywalkError):
    """
    事象系が P(E_n|F_m) <= P(E_{n-m}) を満たさない

    witness に (m, n, state) を保持する。
    """

    def __init__(self, message: str, witness: Optional[Tuple[int, int, Any]] = None):
        super().__init__(message)
        self.witness = witness
