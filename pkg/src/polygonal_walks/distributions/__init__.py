"""
確率質量関数モジュール（厳密演算）
"""

from .lattice_pmf import (
    LatticePMF,
    LawOfX,
    MomentSummary,
    PMFMode,
    UnimodalityReport,
    alternating_sum_law,
    concentration,
    convolution_power,
    convolve,
    geometric_weights,
    interval_mass,
    is_symmetric_unimodal,
    law_of_X,
    max_point_prob,
    mix,
    moments,
    point_mass,
    prob_abs_greater,
    reflect,
    to_floating,
    truncated_geometric_moments,
    uniform_pmf,
    zero_mass,
)
from .serialization import dumps_pmf, load_pmf, loads_pmf, save_pmf

__all__ = [
    "LatticePMF",
    "LawOfX",
    "MomentSummary",
    "PMFMode",
    "UnimodalityReport",
    "alternating_sum_law",
    "concentration",
    "convolution_power",
    "convolve",
    "geometric_weights",
    "interval_mass",
    "is_symmetric_unimodal",
    "law_of_X",
    "max_point_prob",
    "mix",
    "moments",
    "point_mass",
    "prob_abs_greater",
    "reflect",
    "to_floating",
    "truncated_geometric_moments",
    "uniform_pmf",
    "zero_mass",
    "dumps_pmf",
    "loads_pmf",
    "save_pmf",
    "load_pmf",
]
