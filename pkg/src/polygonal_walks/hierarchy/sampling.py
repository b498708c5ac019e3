"""
結合バンドル（T, κ, T^(1), ..., T^(K)）のサンプラー

κ をレベル分布から引き、T ~ R[0, y_κ]。κ 未満のレベルは打ち切り分布から
独立に引き、κ 以上のレベルは T と一致させる。スカラー版はベクトル版の 1 件取り出し。
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..config import settings
from ..exceptions import LevelOutOfRangeError, SamplingRangeError
from .waiting_time import WaitingTimeLaw


@dataclass(frozen=True)
class Bundle:
    """1 回の結合ドロー。levels[k-1] = T^(k)"""

    T: int
    kappa: int
    levels: Tuple[int, ...]


@dataclass(frozen=True)
class BundleBatch:
    """size 件のバンドル。levels は (size, K)"""

    T: np.ndarray
    kappa: np.ndarray
    levels: np.ndarray

    def __len__(self) -> int:
        return len(self.T)

    def bundle(self, i: int) -> Bundle:
        return Bundle(int(self.T[i]), int(self.kappa[i]), tuple(int(v) for v in self.levels[i]))


def check_sampleable(law: WaitingTimeLaw, level: int):
    """
    y_level がサンプリング可能か確認

    Raises:
        SamplingRangeError: y_level > settings.sampling_limit
    """
    if law.y(level) > settings.sampling_limit:
        raise SamplingRangeError(
            f"y_{level} = {law.y(level)} はサンプリング上限 {settings.sampling_limit} を超える"
        )


def _check_K(law: WaitingTimeLaw, K: int):
    if not 1 <= K <= law.L:
        raise LevelOutOfRangeError(f"K = {K} が範囲 1..{law.L} の外")


def sample_kappa(
    law: WaitingTimeLaw, size: int, rng: np.random.Generator, K: Optional[int] = None
) -> np.ndarray:
    """
    レベル指数 κ（1 始まり）を引く

    K を指定すると κ^{|K}（p_l/z_K, l <= K）から引く。
    """
    K = law.L if K is None else K
    cdf = np.cumsum(law.probabilities[:K])
    u = rng.random(size) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, K - 1).astype(np.int64) + 1


def sample_waiting_times(
    law: WaitingTimeLaw, size: int, rng: np.random.Generator, K: Optional[int] = None
) -> np.ndarray:
    """
    T（K 指定時は T^{|K}、すなわち打ち切り分布 truncated_law(law, K)）を size 件
    """
    K = law.L if K is None else K
    _check_K(law, K)
    check_sampleable(law, K)
    kappa = sample_kappa(law, size, rng, K)
    return rng.integers(0, law.heights[kappa - 1] + 1)


def sample_bundles(
    law: WaitingTimeLaw,
    K: int,
    size: int,
    rng: np.random.Generator,
    truncated: bool = False,
) -> BundleBatch:
    """
    バンドルをまとめて引く

    Args:
        law: 待ち時間分布
        K: 出力するレベル数
        size: 件数
        rng: 乱数ストリーム
        truncated: True なら κ を {p_l/z_K} から引く（打ち切り結合）

    Returns:
        BundleBatch
    """
    _check_K(law, K)
    check_sampleable(law, K if truncated else law.L)
    heights = law.heights

    kappa = sample_kappa(law, size, rng, K if truncated else None)
    T = rng.integers(0, heights[kappa - 1] + 1)

    levels = np.empty((size, K), dtype=np.int64)
    for k in range(1, K + 1):
        # κ > k の行だけが独立な打ち切りドローを使う
        independent = rng.integers(0, heights[sample_kappa(law, size, rng, k) - 1] + 1)
        levels[:, k - 1] = np.where(kappa <= k, T, independent)
    return BundleBatch(T, kappa, levels)


def sample_bundle(law: WaitingTimeLaw, K: int, rng: np.random.Generator) -> Bundle:
    """結合バンドルを 1 件"""
    return sample_bundles(law, K, 1, rng).bundle(0)


def sample_truncated_bundle(law: WaitingTimeLaw, K: int, rng: np.random.Generator) -> Bundle:
    """κ を {p_l/z_K} から引く打ち切りバンドルを 1 件"""
    return sample_bundles(law, K, 1, rng, truncated=True).bundle(0)
