"""
construct-params / simulate / estimate コマンド

出力はすべて out_dir に書き、書いたファイルのパスを返す。乱数は
runner.seeds のストリームから取り、ワーカー数は結果に影響しない。
"""

import csv
import json
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from ..config import settings
from ..distributions import LatticePMF, PMFMode, law_of_X
from ..drw import DRWConfig, PointEvents, point_events, simulate_drw, trace_header, trace_rows
from ..exceptions import InfeasibleWindowError, PreconditionViolation, SamplingRangeError
from ..hierarchy import (
    WaitingTimeLaw,
    as_pmf,
    construct_params,
    growth_report,
    law_from_params,
    law_from_spec,
    level_display,
    load_params,
    save_params,
    validate_params,
)
from ..logger import logger
from ..verification import EstimateWithCI, EventSpec, ExponentFit, count_event, fit_exponent, format_number
from ..verification.estimates import degenerate_value
from ..walks import (
    Box,
    EventKind,
    WalkPath,
    lazy_walk_pmf,
    path_header,
    path_rows,
    simple_walk_pmf,
    simulate_walk,
    simulate_walk_batch,
)
from .models import RunConfig, SimMode, WalkKind
from .pool import run_tasks
from .seeds import block_ranges, stream

DEFAULT_DRW_LAW = "3/4:1,1/4:3"


class CommandResult(NamedTuple):
    """書き出したファイルとチェックごとの成否"""

    outputs: List[Path]
    checks: Dict[str, bool]


def write_json(data: dict, path: Union[str, Path]):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")


def _mp(x) -> Optional[str]:
    return None if x is None else mpmath.nstr(x, 12)


# ======================
# 分布の解決
# ======================


def resolve_law(config: RunConfig) -> Optional[WaitingTimeLaw]:
    """
    --law または --params-file から待ち時間分布を作る

    params ファイルの場合はサンプリング可能な最大のレベル K まで使う。
    """
    if config.law is not None:
        return law_from_spec(config.law)
    if config.params_file is None:
        return None
    params = load_params(config.params_file)
    K = 1
    for k in range(2, params.k_max + 1):
        rec = params.level(k)
        if rec.p_exact is None or rec.y_exact is None or rec.y_exact > settings.sampling_limit:
            break
        K = k
    logger.info(f"params ファイルからレベル 1..{K} を使用: {config.params_file}")
    return law_from_params(params, K)


def increment_for(config: RunConfig, law: Optional[WaitingTimeLaw] = None) -> LatticePMF:
    """1 座標の増分分布（浮動小数点）"""
    if config.walk == WalkKind.LAZY:
        return lazy_walk_pmf(PMFMode.FLOAT)
    if config.walk == WalkKind.SIMPLE:
        return simple_walk_pmf(PMFMode.FLOAT)
    law = law or resolve_law(config)
    if law is None:
        raise PreconditionViolation("walk=law には待ち時間分布が必要")
    return law_of_X(as_pmf(law, PMFMode.FLOAT)).law


def event_spec_for(config: RunConfig, increment: LatticePMF) -> EventSpec:
    box = Box.cube(config.dim) if config.event in (EventKind.BOX_VISIT, EventKind.SEGMENT_HIT) else None
    return EventSpec(kind=config.event, increment=increment, d=config.dim, level=config.level, box=box)


# ======================
# ブロック単位の推定
# ======================


def _count_block(task: Tuple[EventSpec, int, int, int, str, int]) -> int:
    spec, n, size, master_seed, label, b = task
    return count_event(spec, n, size, stream(master_seed, label, b))


def estimate_over_grid(
    spec: EventSpec,
    n_grid: Sequence[int],
    replicas: int,
    master_seed: int,
    command: str,
    workers: Optional[int] = None,
    confidence: Optional[float] = None,
) -> List[EstimateWithCI]:
    """
    n_grid の各点で事象確率を推定

    (n, ブロック) ごとに独立なストリーム "{command}/n={n}" のブロック番号を使う。
    """
    if spec.degenerate:
        value = degenerate_value(spec)
        return [EstimateWithCI.exact(value, replicas, f"{command}/n={n}") for n in n_grid]

    blocks = block_ranges(replicas, settings.block_size)
    tasks = [(spec, n, size, master_seed, f"{command}/n={n}", b) for n in n_grid for b, size in blocks]
    counts = run_tasks(_count_block, tasks, workers)

    estimates = []
    for i, n in enumerate(n_grid):
        successes = sum(counts[i * len(blocks) : (i + 1) * len(blocks)])
        est = EstimateWithCI.from_counts(successes, replicas, confidence, f"{command}/n={n}")
        logger.info(f"n={n}: p̂={est.point:.6g} [{est.ci_lo:.6g}, {est.ci_hi:.6g}]")
        estimates.append(est)
    return estimates


def fit_or_none(
    n_grid: Sequence[int], estimates: Sequence[EstimateWithCI], confidence: Optional[float] = None
) -> Optional[ExponentFit]:
    """n >= 1 の点でべき指数をフィット（点が足りなければ None）"""
    samples = [(n, e.point, (e.ci_lo, e.ci_hi)) for n, e in zip(n_grid, estimates) if n >= 1]
    try:
        return fit_exponent(samples, confidence)
    except PreconditionViolation as e:
        logger.warn(f"フィットできない: {e}")
        return None


# ======================
# construct-params
# ======================


def cmd_construct_params(config: RunConfig) -> CommandResult:
    """
    パラメータを構成し、params.json と制約の余裕・レベル表を書き出す

    Raises:
        InfeasibleWindowError: 構成失敗（k_max と A を付けて再送出）
    """
    out = config.out_dir
    try:
        params = construct_params(config.a_constant, config.k_max)
    except InfeasibleWindowError as e:
        raise InfeasibleWindowError(f"k_max={config.k_max}, A={config.a_constant or 'compute_A'}: {e}") from e
    report = validate_params(params)

    params_path = out / "params.json"
    save_params(params, params_path)

    slack_path = out / "construct_params_constraints.csv"
    logger.info(f"{'k':>3} {'constraint':<12} {'slack':>24} holds")
    with open(slack_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["k", "constraint", "slack", "holds"])
        for c in report.checks:
            writer.writerow([c.k, c.constraint, _mp(c.slack), "true" if c.holds else "false"])
            logger.info(f"{c.k:>3} {c.constraint:<12} {_mp(c.slack):>24} {c.holds}")

    levels_path = out / "construct_params_levels.csv"
    columns = ["p_mantissa", "p_log10", "log10_y", "log10_log10_y", "log10_c"]
    with open(levels_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["k", *columns, "p_exact", "y_exact", "c_exact", "halvings"])
        for rec in params.levels:
            shown = level_display(params, rec)
            writer.writerow(
                [
                    rec.k,
                    *[shown[c] or "" for c in columns],
                    "" if rec.p_exact is None else str(rec.p_exact),
                    "" if rec.y_exact is None else rec.y_exact,
                    "" if rec.c_exact is None else rec.c_exact,
                    "" if rec.halvings is None else rec.halvings,
                ]
            )

    growth = [{"k": k, "loglog_y_next_minus_log_y": _mp(v)} for k, v in growth_report(params)]
    summary_path = out / "construct_params_summary.json"
    write_json(
        {
            "A": _mp(params.A),
            "k_max": params.k_max,
            "all_passed": report.all_passed,
            "failures": [f"{c.constraint}@k={c.k}" for c in report.failures()],
            "growth": growth,
        },
        summary_path,
    )
    if report.all_passed:
        logger.success(f"全制約を満たす (k_max={params.k_max})")
    else:
        logger.error(f"制約違反: {len(report.failures())} 件")
    return CommandResult(
        [params_path, slack_path, levels_path, summary_path], {"validate_params": report.all_passed}
    )


# ======================
# simulate
# ======================


def _walk_replica(task: Tuple[RunConfig, Optional[WaitingTimeLaw], int]) -> WalkPath:
    config, law, i = task
    rng = stream(config.master_seed, "simulate", i)
    if config.walk == WalkKind.LAW:
        return simulate_walk(config.dim, law, None, config.steps, rng)
    positions = simulate_walk_batch(increment_for(config), config.dim, config.steps, 1, rng)[0]
    return WalkPath(config.dim, positions)


def _drw_replica(task: Tuple[RunConfig, WaitingTimeLaw, int]):
    config, law, i = task
    rng = stream(config.master_seed, "simulate", i)
    return simulate_drw(DRWConfig(d=config.dim, law=law, rule=config.rule, phases=config.phases), rng)


def cmd_simulate(config: RunConfig) -> CommandResult:
    """
    replicas 本の経路（walk）またはトレース（drw）を 1 つの CSV に書き出す

    反復 i はストリーム ("simulate", i) を使う。
    """
    out = config.out_dir
    law = resolve_law(config)
    indices = range(config.replicas)

    if config.mode == SimMode.WALK:
        paths = run_tasks(_walk_replica, [(config, law, i) for i in indices], config.workers)
        csv_path = out / "simulate_paths.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["replica", *path_header(config.dim)])
            for i, path in enumerate(paths):
                writer.writerows([i, *row] for row in path_rows(path))
        summary = {
            "mode": config.mode.value,
            "walk": config.walk.value,
            "dim": config.dim,
            "steps": config.steps,
            "replicas": config.replicas,
            "master_seed": config.master_seed,
            "final_positions": [[int(v) for v in p.positions[-1]] for p in paths],
        }
    else:
        if law is None:
            law = law_from_spec(DEFAULT_DRW_LAW)
            logger.info(f"待ち時間分布の指定なし、既定値を使用: {DEFAULT_DRW_LAW}")
        traces = run_tasks(_drw_replica, [(config, law, i) for i in indices], config.workers)
        csv_path = out / "simulate_traces.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["replica", *trace_header(config.dim)])
            for i, trace in enumerate(traces):
                writer.writerows([i, *row] for row in trace_rows(trace))
        origin = [0] * config.dim
        events: List[PointEvents] = [point_events(t, origin) for t in traces]
        summary = {
            "mode": config.mode.value,
            "law": str(law),
            "rule": config.rule.value,
            "dim": config.dim,
            "phases": config.phases,
            "replicas": config.replicas,
            "master_seed": config.master_seed,
            "final_positions": [[int(v) for v in t.final_position] for t in traces],
            "origin_events": [e._asdict() for e in events],
        }

    summary_path = out / "simulate_summary.json"
    write_json(summary, summary_path)
    logger.success(f"simulate 完了: {config.replicas} 本 -> {csv_path}")
    return CommandResult([csv_path, summary_path], {})


# ======================
# estimate
# ======================


def cmd_estimate(config: RunConfig) -> CommandResult:
    """
    n_grid の各点で事象確率を推定し、log-log でべき指数をフィット

    segment_hit では座標ごとの区間ヒット確率の d 乗（独立性による上界）も並べる。
    """
    out = config.out_dir
    try:
        increment = increment_for(config)
    except SamplingRangeError as e:
        raise PreconditionViolation(f"増分分布を作れない: {e}") from e
    spec = event_spec_for(config, increment)
    logger.info(f"estimate: event={spec.kind.value}, walk={config.walk.value}, d={spec.d}")
    estimates = estimate_over_grid(
        spec, config.n_grid, config.replicas, config.master_seed, "estimate", config.workers, config.confidence
    )

    factor_bounds: Optional[List[EstimateWithCI]] = None
    if spec.kind == EventKind.SEGMENT_HIT and spec.d > 1:
        coordinate = EventSpec(kind=EventKind.INTERVAL_HIT, increment=increment, d=1, lo=-1.0, hi=1.0)
        per_coord = estimate_over_grid(
            coordinate,
            config.n_grid,
            config.replicas,
            config.master_seed,
            "estimate/coordinate",
            config.workers,
            config.confidence,
        )
        d = spec.d
        factor_bounds = [
            EstimateWithCI(e.point**d, e.ci_lo**d, e.ci_hi**d, e.replicas, e.successes, e.seed) for e in per_coord
        ]

    points_path = out / "estimate_points.csv"
    with open(points_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        header = ["n", "log_n", "p_hat", "ci_lo", "ci_hi", "log_p_hat", "successes", "replicas"]
        if factor_bounds is not None:
            header += ["factor_bound", "factor_ci_hi"]
        writer.writerow(header)
        for i, (n, e) in enumerate(zip(config.n_grid, estimates)):
            row = [
                n,
                format_number(float(np.log(n))) if n >= 1 else "",
                format_number(e.point),
                format_number(e.ci_lo),
                format_number(e.ci_hi),
                format_number(float(np.log(e.point))) if e.point > 0 else "",
                e.successes,
                e.replicas,
            ]
            if factor_bounds is not None:
                row += [format_number(factor_bounds[i].point), format_number(factor_bounds[i].ci_hi)]
            writer.writerow(row)

    fit = fit_or_none(config.n_grid, estimates, config.confidence)
    summary = {
        "event": spec.kind.value,
        "walk": config.walk.value,
        "dim": spec.d,
        "n_grid": list(config.n_grid),
        "replicas": config.replicas,
        "master_seed": config.master_seed,
        "confidence": config.confidence,
        "slope": None if fit is None else fit.slope,
        "slope_ci": None if fit is None else list(fit.slope_ci),
        "intercept": None if fit is None else fit.intercept,
        "points_used": 0 if fit is None else fit.points_used,
    }
    summary_path = out / "estimate_summary.json"
    write_json(summary, summary_path)
    if fit is not None:
        logger.success(f"傾き {fit.slope:.4f} [{fit.slope_ci[0]:.4f}, {fit.slope_ci[1]:.4f}]")
    return CommandResult([points_path, summary_path], {})
