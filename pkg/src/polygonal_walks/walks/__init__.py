"""
ランダムウォークと幾何的事象モジュール
"""

from .events import (
    EventKind,
    EventRecord,
    PolygonalHits,
    box_visit_mask,
    count_polygonal_hits,
    detect_interval_hits,
    detect_level_crossing,
    detect_returns,
    detect_sign_change,
    detect_Vn,
    hits_after,
    level_crossing_mask,
    mean_polygonal_hits,
    return_mask,
    segment_hit_records,
    sign_change_mask,
    vn_mask,
    write_events_csv,
)
from .geometry import Box, interval_hit_mask, segment_hit_mask, segment_hits_box
from .paths import (
    IncrementBatch,
    IncrementMeta,
    WalkPath,
    lazy_walk_pmf,
    sample_increment,
    sample_increments,
    sample_position_batch,
    path_header,
    path_rows,
    save_path_csv,
    simple_walk_pmf,
    simulate_walk,
    simulate_walk_batch,
)

__all__ = [
    "EventKind",
    "EventRecord",
    "PolygonalHits",
    "box_visit_mask",
    "count_polygonal_hits",
    "detect_interval_hits",
    "detect_level_crossing",
    "detect_returns",
    "detect_sign_change",
    "detect_Vn",
    "hits_after",
    "level_crossing_mask",
    "mean_polygonal_hits",
    "return_mask",
    "segment_hit_records",
    "sign_change_mask",
    "vn_mask",
    "write_events_csv",
    "Box",
    "interval_hit_mask",
    "segment_hit_mask",
    "segment_hits_box",
    "IncrementBatch",
    "IncrementMeta",
    "WalkPath",
    "lazy_walk_pmf",
    "sample_increment",
    "sample_increments",
    "sample_position_batch",
    "path_header",
    "path_rows",
    "save_path_csv",
    "simple_walk_pmf",
    "simulate_walk",
    "simulate_walk_batch",
]
