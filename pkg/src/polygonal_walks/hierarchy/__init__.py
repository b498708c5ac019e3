"""
階層的待ち時間モジュール
"""

from .constants import GLawParams, chebyshev_constant, compute_A, ewurz_statistic
from .dlambda import DLambdaResult, dlambda_sup
from .log_magnitude import LogForm
from .params import (
    ConstraintCheck,
    HierarchyParams,
    LevelRecord,
    ParamsReport,
    construct_params,
    growth_report,
    law_from_params,
    level_display,
    load_params,
    save_params,
    validate_params,
)
from .sampling import (
    Bundle,
    BundleBatch,
    sample_bundle,
    sample_bundles,
    sample_kappa,
    sample_truncated_bundle,
    sample_waiting_times,
)
from .waiting_time import WaitingTimeLaw, as_pmf, law_from_spec, truncated_law

__all__ = [
    "GLawParams",
    "chebyshev_constant",
    "compute_A",
    "ewurz_statistic",
    "DLambdaResult",
    "dlambda_sup",
    "LogForm",
    "ConstraintCheck",
    "HierarchyParams",
    "LevelRecord",
    "ParamsReport",
    "construct_params",
    "growth_report",
    "law_from_params",
    "level_display",
    "load_params",
    "save_params",
    "validate_params",
    "Bundle",
    "BundleBatch",
    "sample_bundle",
    "sample_bundles",
    "sample_kappa",
    "sample_truncated_bundle",
    "sample_waiting_times",
    "WaitingTimeLaw",
    "as_pmf",
    "law_from_spec",
    "truncated_law",
]
