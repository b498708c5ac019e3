"""
定数 A の計算

Z = Σ_{j<=n} Bin(G_j, q) について E(Z^{-1/2}·1{Z>0}) <= A/(p_k·√n) を与える A。

Chebyshev により P(Z < b·n·q) <= Var Z/(E Z - b n q)^2 で、
Var Z = n[q(1-q)E G + q^2 Var G] から
    P(Z < b n q) <= max(E G, Var G)/((E G - b)^2 · n q) <= B/(n p_k)
（q = p_k/z_k >= p_k）。よって
    E(Z^{-1/2} 1{Z>0}) <= (b n p_k)^{-1/2} + B/(n p_k) <= (1/√b + B)/(p_k √n)。
"""

import math
from typing import NamedTuple, Optional

import numpy as np


class GLawParams(NamedTuple):
    """G のモーメント（既定は幾何分布、パラメータ 2/3）"""

    mean: float = 1.5
    variance: float = 0.75


def chebyshev_constant(g_law: Optional[GLawParams] = None) -> float:
    """B = max(E G, Var G)/(E G - b)^2, b = E G/2"""
    g_law = g_law or GLawParams()
    b = g_law.mean / 2
    return max(g_law.mean, g_law.variance) / (g_law.mean - b) ** 2


def compute_A(g_law: Optional[GLawParams] = None) -> float:
    """
    A = 1/√b + B

    既定の G では b = 3/4, B = 8/3 で A ≈ 3.8214。
    """
    g_law = g_law or GLawParams()
    b = g_law.mean / 2
    return 1.0 / math.sqrt(b) + chebyshev_constant(g_law)


def ewurz_statistic(n: int, p: float, replicas: int, rng: np.random.Generator) -> float:
    """
    モンテカルロで E(Z^{-1/2}·1{Z>0})·p·√n を推定

    Σ_{j<=n} G_j = n + NegBin(n, 2/3)、Z | ΣG ~ Bin(ΣG, p)。
    """
    g_total = n + rng.negative_binomial(n, 2.0 / 3.0, size=replicas)
    z = rng.binomial(g_total, p)
    positive = z > 0
    values = np.zeros(replicas)
    values[positive] = 1.0 / np.sqrt(z[positive])
    return float(values.mean() * p * math.sqrt(n))
