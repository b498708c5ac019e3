"""
方向強化ランダムウォークモジュール
"""

from .embedded import (
    PointEvents,
    embedded_walk,
    horizontal_run_lengths,
    point_events,
    vertical_run_increments,
)
from .simulator import (
    DRWConfig,
    DRWPhase,
    DRWRule,
    DRWTrace,
    save_trace_csv,
    simulate_drw,
    trace_header,
    trace_rows,
)

__all__ = [
    "PointEvents",
    "embedded_walk",
    "horizontal_run_lengths",
    "point_events",
    "vertical_run_increments",
    "DRWConfig",
    "DRWPhase",
    "DRWRule",
    "DRWTrace",
    "save_trace_csv",
    "simulate_drw",
    "trace_header",
    "trace_rows",
]
