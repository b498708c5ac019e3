"""
べき指数のフィット（log-log 重み付き最小二乗）
"""

import math
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import PreconditionViolation
from ..logger import logger
from .statistics import normal_quantile

MIN_POINTS = 4

SamplePoint = Tuple[int, float, Tuple[float, float]]


class ExponentFit(NamedTuple):
    slope: float
    slope_ci: Tuple[float, float]
    intercept: float
    points_used: int


def fit_exponent(samples: Sequence[SamplePoint], confidence: Optional[float] = None) -> ExponentFit:
    """
    p_n ≈ C·n^slope のフィット

    各点の log p̂ の分散はデルタ法 (se(p̂)/p̂)^2 で見積もり、se(p̂) は信頼区間の
    幅から逆算する。全点の区間幅が 0（厳密値）のときは残差から分散を見積もる。

    Args:
        samples: (n, p̂, (ci_lo, ci_hi)) の列
        confidence: samples の区間と傾きの区間の信頼水準

    Returns:
        ExponentFit

    Raises:
        PreconditionViolation: p̂ > 0 の点が 4 未満
    """
    z = normal_quantile(confidence)
    kept = []
    for n, p, (lo, hi) in samples:
        if p <= 0:
            logger.warn(f"fit_exponent: p̂ = 0 の点を除外 (n={n})")
            continue
        kept.append((n, p, lo, hi))
    if len(kept) < MIN_POINTS:
        raise PreconditionViolation(f"フィットには p̂ > 0 の点が {MIN_POINTS} 以上必要: {len(kept)}")

    arr = np.array(kept, dtype=np.float64)
    x = np.log(arr[:, 0])
    y = np.log(arr[:, 1])
    se_p = (arr[:, 3] - arr[:, 2]) / (2 * z)
    sigma = se_p / arr[:, 1]

    if np.all(sigma == 0):
        coef, cov = np.polyfit(x, y, 1, cov=True)
    else:
        # 区間幅 0 の点は最小の正の分散で代用
        sigma = np.where(sigma > 0, sigma, sigma[sigma > 0].min())
        coef, cov = np.polyfit(x, y, 1, w=1 / sigma, cov="unscaled")
    slope, intercept = float(coef[0]), float(coef[1])
    half = z * math.sqrt(max(float(cov[0, 0]), 0.0))
    return ExponentFit(slope, (slope - half, slope + half), intercept, len(kept))
