"""
補題と推定式の検証モジュール
"""

from .bounds import (
    L2Row,
    LogSeriesResult,
    Qkn2Row,
    QuantileBoundResult,
    SeriesRow,
    TailBoundResult,
    abs_quantile,
    check_log_series,
    check_qkn2,
    check_quantile_bound,
    check_tail_bound,
    l2_recursion_diagnostic,
    qkn2_bound,
    return_probabilities,
    series_partial_sums,
    sign_change_probability,
)
from .estimates import EstimateWithCI, EventSpec, count_event, estimate_event_prob
from .event_systems import (
    EventSystem,
    RecurreventsReport,
    RecurreventsRow,
    check_recurrevents,
    phi_distribution,
    standard_event_systems,
    sticky_violator,
    verify_hypothesis,
)
from .fitting import ExponentFit, fit_exponent
from .lemmas import (
    MaxestTable,
    MomestResult,
    UnimodReport,
    UnimodestResult,
    check_maxest,
    check_momest,
    check_unimod,
    check_unimodest,
    discrete_unimodal_constant,
)
from .report import CheckRow, CheckSummary, format_number, summarize, write_check_csv, write_summary_json
from .statistics import (
    StatResult,
    chi_square_against_pmf,
    independence_test,
    symmetry_test,
    wilson_interval,
)

__all__ = [
    "L2Row",
    "LogSeriesResult",
    "Qkn2Row",
    "QuantileBoundResult",
    "SeriesRow",
    "TailBoundResult",
    "abs_quantile",
    "check_log_series",
    "check_qkn2",
    "check_quantile_bound",
    "check_tail_bound",
    "l2_recursion_diagnostic",
    "qkn2_bound",
    "return_probabilities",
    "series_partial_sums",
    "sign_change_probability",
    "EstimateWithCI",
    "EventSpec",
    "count_event",
    "estimate_event_prob",
    "EventSystem",
    "RecurreventsReport",
    "RecurreventsRow",
    "check_recurrevents",
    "phi_distribution",
    "standard_event_systems",
    "sticky_violator",
    "verify_hypothesis",
    "ExponentFit",
    "fit_exponent",
    "MaxestTable",
    "MomestResult",
    "UnimodReport",
    "UnimodestResult",
    "check_maxest",
    "check_momest",
    "check_unimod",
    "check_unimodest",
    "discrete_unimodal_constant",
    "CheckRow",
    "CheckSummary",
    "format_number",
    "summarize",
    "write_check_csv",
    "write_summary_json",
    "StatResult",
    "chi_square_against_pmf",
    "independence_test",
    "symmetry_test",
    "wilson_interval",
]
