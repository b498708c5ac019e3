"""
経路上の幾何的事象の検出

二時点事象 (S_n, S_{n+1}) の判定は配列マスクで行い、経路検出と
モンテカルロ推定の両方で同じ関数を使う。
"""

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List, NamedTuple, Tuple, Union

import numpy as np

from ..distributions import LatticePMF
from ..exceptions import PreconditionViolation
from .geometry import Box, interval_hit_mask, segment_hit_mask
from .paths import WalkPath, simulate_walk_batch


class EventKind(str, Enum):
    """事象の種類"""

    RETURN = "return"
    SIGN_CHANGE = "sign_change"
    LEVEL_CROSSING = "level_crossing"
    INTERVAL_HIT = "interval_hit"
    BOX_VISIT = "box_visit"
    V_N = "V_n"
    SEGMENT_HIT = "segment_hit"


@dataclass(frozen=True)
class EventRecord:
    kind: EventKind
    n: int
    coord: int = -1
    payload: Tuple[int, ...] = ()


class PolygonalHits(NamedTuple):
    count: int
    indices: np.ndarray


# ======================
# 配列マスク
# ======================


def return_mask(s: np.ndarray) -> np.ndarray:
    """全座標が 0"""
    s = np.asarray(s)
    return np.all(s == 0, axis=-1) if s.ndim > 1 else s == 0


def sign_change_mask(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a·b < 0（0 の端点は含まない）"""
    return np.sign(a) * np.sign(b) < 0


def level_crossing_mask(a: np.ndarray, b: np.ndarray, level: float) -> np.ndarray:
    """level ∈ [min(a,b), max(a,b)]（閉区間）"""
    return (np.minimum(a, b) <= level) & (level <= np.maximum(a, b))


def box_visit_mask(s: np.ndarray, box: Box) -> np.ndarray:
    s = np.asarray(s)
    return np.all((s >= np.asarray(box.lo)) & (s <= np.asarray(box.hi)), axis=-1)


def vn_mask(s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    """座標 0 が狭義に符号反転し、座標 1 が両端で 0"""
    return sign_change_mask(s0[:, 0], s1[:, 0]) & (s0[:, 1] == 0) & (s1[:, 1] == 0)


# ======================
# 経路上の検出
# ======================


def _check_coord(path: WalkPath, coord: int):
    if not 0 <= coord < path.dim:
        raise PreconditionViolation(f"座標 {coord} が範囲外（dim={path.dim}）")


def detect_returns(path: WalkPath) -> List[EventRecord]:
    """S_n = 0（n >= 1）"""
    hits = np.nonzero(return_mask(path.positions[1:]))[0] + 1
    return [EventRecord(EventKind.RETURN, int(n)) for n in hits]


def detect_sign_change(path: WalkPath, coord: int = 0, strict: bool = True) -> List[EventRecord]:
    """
    S_n·S_{n+1} < 0 となる n

    strict=False は sgn(S_n) = -sgn(S_{n+1})（sgn(0)=0）の字義どおりの形で、結果は同じ。
    """
    _check_coord(path, coord)
    s = path.coordinate(coord)
    a, b = s[:-1], s[1:]
    if strict:
        mask = a * b < 0
    else:
        mask = (np.sign(a) == -np.sign(b)) & (np.sign(a) != 0)
    return [
        EventRecord(EventKind.SIGN_CHANGE, int(n), coord, (int(a[n]), int(b[n])))
        for n in np.nonzero(mask)[0]
    ]


def detect_level_crossing(path: WalkPath, coord: int, level: float) -> List[EventRecord]:
    _check_coord(path, coord)
    s = path.coordinate(coord)
    mask = level_crossing_mask(s[:-1], s[1:], level)
    return [
        EventRecord(EventKind.LEVEL_CROSSING, int(n), coord, (int(s[n]), int(s[n + 1])))
        for n in np.nonzero(mask)[0]
    ]


def detect_interval_hits(path: WalkPath, coord: int, lo: float = -1, hi: float = 1) -> List[EventRecord]:
    """座標 coord の区間 [S_n, S_{n+1}] が [lo, hi] と交わる n"""
    _check_coord(path, coord)
    s = path.coordinate(coord)
    mask = interval_hit_mask(s[:-1], s[1:], lo, hi)
    return [EventRecord(EventKind.INTERVAL_HIT, int(n), coord) for n in np.nonzero(mask)[0]]


def detect_Vn(path2d: WalkPath) -> List[EventRecord]:
    if path2d.dim != 2:
        raise PreconditionViolation(f"V_n は 2 次元経路のみ: dim={path2d.dim}")
    p = path2d.positions
    mask = vn_mask(p[:-1], p[1:])
    return [
        EventRecord(EventKind.V_N, int(n), 0, (int(p[n, 0]), int(p[n + 1, 0])))
        for n in np.nonzero(mask)[0]
    ]


def count_polygonal_hits(path: WalkPath, box: Box) -> PolygonalHits:
    """線分 [S_n, S_{n+1}] が box に触れる n の数と位置"""
    if path.dim != box.dim:
        raise PreconditionViolation(f"次元が一致しない: {path.dim} != {box.dim}")
    p = path.positions
    indices = np.nonzero(segment_hit_mask(p[:-1], p[1:], box))[0]
    return PolygonalHits(len(indices), indices)


def segment_hit_records(path: WalkPath, box: Box) -> List[EventRecord]:
    hits = count_polygonal_hits(path, box)
    return [EventRecord(EventKind.SEGMENT_HIT, int(n)) for n in hits.indices]


def hits_after(paths_array: np.ndarray, box: Box, burn_in: int = 0) -> np.ndarray:
    """
    (paths, n+1, d) の経路群について、経路ごとの n >= burn_in の線分ヒット数
    """
    m, length, d = paths_array.shape
    p0 = paths_array[:, burn_in:-1, :].reshape(-1, d)
    p1 = paths_array[:, burn_in + 1 :, :].reshape(-1, d)
    return segment_hit_mask(p0, p1, box).reshape(m, length - 1 - burn_in).sum(axis=1)


def mean_polygonal_hits(
    increment: LatticePMF,
    d: int,
    paths: int,
    length: int,
    burn_in: int,
    box: Box,
    rng: np.random.Generator,
    chunk: int = 256,
) -> float:
    """
    長さ length の経路 paths 本を生成し、burn_in 以降の線分ヒット数の平均を返す

    メモリを抑えるため chunk 本ずつ生成する。
    """
    if burn_in >= length:
        raise PreconditionViolation(f"burn_in < length が必要: {burn_in} >= {length}")
    total = 0
    done = 0
    while done < paths:
        batch = min(chunk, paths - done)
        total += int(hits_after(simulate_walk_batch(increment, d, length, batch, rng), box, burn_in).sum())
        done += batch
    return total / paths


def write_events_csv(records: Iterable[EventRecord], file: Union[str, Path]):
    """kind,n,coord,payload（payload は ; 区切り）"""
    with open(file, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["kind", "n", "coord", "payload"])
        for r in sorted(records, key=lambda r: (r.n, r.kind.value, r.coord)):
            writer.writerow([r.kind.value, r.n, r.coord, ";".join(str(v) for v in r.payload)])
