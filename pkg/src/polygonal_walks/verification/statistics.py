"""
統計的検定の補助関数（scipy.stats）
"""

import math
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import stats

from ..config import settings
from ..distributions import LatticePMF, to_floating
from ..exceptions import PreconditionViolation


class StatResult(NamedTuple):
    statistic: float
    dof: int
    pvalue: float


def normal_quantile(confidence: Optional[float] = None) -> float:
    """両側 confidence 区間の z 値"""
    confidence = settings.confidence if confidence is None else confidence
    if not 0 < confidence < 1:
        raise PreconditionViolation(f"信頼水準は (0, 1): {confidence}")
    return float(stats.norm.ppf(1 - (1 - confidence) / 2))


def wilson_interval(
    successes: int, trials: int, confidence: Optional[float] = None
) -> Tuple[float, float]:
    """
    Wilson スコア区間

    Args:
        successes: 成功回数
        trials: 試行回数（1 以上）
        confidence: 信頼水準（省略時 settings.confidence）

    Returns:
        (lo, hi)  lo <= successes/trials <= hi
    """
    if trials < 1 or not 0 <= successes <= trials:
        raise PreconditionViolation(f"不正な件数: {successes}/{trials}")
    z = normal_quantile(confidence)
    p = successes / trials
    z2n = z * z / trials
    denom = 1 + z2n
    center = (p + z2n / 2) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    lo = max(0.0, min(center - half, p))
    hi = min(1.0, max(center + half, p))
    return lo, hi


def _pool_bins(expected: np.ndarray, min_expected: float) -> np.ndarray:
    """期待度数が min_expected 以上になるよう隣接原子をまとめたビン番号"""
    labels = np.empty(len(expected), dtype=np.int64)
    label, running = 0, 0.0
    for i, e in enumerate(expected):
        labels[i] = label
        running += e
        if running >= min_expected:
            label += 1
            running = 0.0
    # 末尾の不足分は直前のビンへ
    if running < min_expected and label > 0:
        labels[labels == label] = label - 1
    return labels


def chi_square_against_pmf(
    samples: np.ndarray, pmf: LatticePMF, min_expected: float = 5.0
) -> StatResult:
    """
    整数標本と分布 pmf の適合度検定

    台の外の標本が 1 つでもあれば p 値 0 を返す。
    """
    samples = np.asarray(samples, dtype=np.int64)
    p = to_floating(pmf)
    idx = samples - p.offset
    inside = (idx >= 0) & (idx < len(p))
    if not np.all(inside):
        return StatResult(math.inf, 0, 0.0)

    observed = np.bincount(idx, minlength=len(p)).astype(np.float64)
    expected = p.as_array() * len(samples)
    labels = _pool_bins(expected, min_expected)
    n_bins = int(labels.max()) + 1
    if n_bins < 2:
        return StatResult(0.0, 0, 1.0)
    obs = np.bincount(labels, weights=observed, minlength=n_bins)
    exp = np.bincount(labels, weights=expected, minlength=n_bins)
    exp *= obs.sum() / exp.sum()
    result = stats.chisquare(obs, exp)
    return StatResult(float(result.statistic), n_bins - 1, float(result.pvalue))


def _categories(values: np.ndarray, min_count: int) -> np.ndarray:
    """出現数 min_count 未満の値を 1 つのカテゴリにまとめる"""
    uniq, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    rare = counts < min_count
    mapping = np.where(rare, len(uniq), np.arange(len(uniq)))
    _, compact = np.unique(mapping[inverse], return_inverse=True)
    return compact


def independence_test(a: np.ndarray, b: np.ndarray, min_count: int = 20) -> StatResult:
    """2 つの整数列の独立性（分割表の χ² 検定）"""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise PreconditionViolation(f"長さが一致しない: {a.shape} != {b.shape}")
    ca = _categories(a, min_count)
    cb = _categories(b, min_count)
    table = np.zeros((ca.max() + 1, cb.max() + 1), dtype=np.int64)
    np.add.at(table, (ca, cb), 1)
    # 空の行・列を除く
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        return StatResult(0.0, 0, 1.0)
    statistic, pvalue, dof, _ = stats.chi2_contingency(table)
    return StatResult(float(statistic), int(dof), float(pvalue))


def symmetry_test(values: np.ndarray) -> StatResult:
    """正と負の出現数の二項検定（0 は除く）"""
    values = np.asarray(values)
    positive = int(np.sum(values > 0))
    n = positive + int(np.sum(values < 0))
    if n == 0:
        return StatResult(0.0, 0, 1.0)
    result = stats.binomtest(positive, n, 0.5)
    return StatResult(float(positive), n, float(result.pvalue))
