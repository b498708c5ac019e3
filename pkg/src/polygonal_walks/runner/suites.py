"""
verify コマンドのスイート

各スイートは CheckRow の列と、モンテカルロを使ったチェックの反復数、
診断用に書き出したファイルを返す。乱数はチェック名ごとのストリームから取る。
"""

import csv
import math
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from ..distributions import LatticePMF, PMFMode, law_of_X, mix, moments, to_floating, uniform_pmf
from ..drw import (
    DRWConfig,
    DRWRule,
    embedded_walk,
    horizontal_run_lengths,
    simulate_drw,
    vertical_run_increments,
)
from ..exceptions import HypothesisViolation, PreconditionViolation
from ..hierarchy import (
    WaitingTimeLaw,
    as_pmf,
    compute_A,
    construct_params,
    dlambda_sup,
    law_from_spec,
    validate_params,
)
from ..logger import logger
from ..verification import (
    CheckRow,
    EstimateWithCI,
    EventSpec,
    check_log_series,
    check_maxest,
    check_momest,
    check_qkn2,
    check_quantile_bound,
    check_recurrevents,
    check_tail_bound,
    check_unimod,
    check_unimodest,
    chi_square_against_pmf,
    estimate_event_prob,
    format_number,
    independence_test,
    l2_recursion_diagnostic,
    return_probabilities,
    series_partial_sums,
    sign_change_probability,
    standard_event_systems,
    sticky_violator,
    summarize,
    symmetry_test,
    write_check_csv,
    write_summary_json,
)
from ..verification.estimates import MIN_REPLICAS
from ..walks import Box, EventKind, lazy_walk_pmf, mean_polygonal_hits
from .commands import CommandResult, estimate_over_grid, fit_or_none
from .models import RunConfig, Suite
from .seeds import collision_audit, stream

# 補題コーパスの大きさ
MOMEST_LAWS = 10000
UNIMOD_LAWS = 100
UNIMODEST_LAWS = 1000
MAXEST_Y = (1, 2, 4, 8, 16)
MAXEST_M = tuple(range(1, 65))
MAXEST_SUP = 1.5

EXACT_RETURN_GRID = (8, 16, 32, 64, 128, 256, 512)
LEVEL_CROSSING_GRID = (16, 32, 64, 128, 256, 512, 1024)
BOX_GRID = (16, 32, 64, 128, 256, 512)
HIT_PATH_LENGTH = 10**4
HIT_PATHS = 10**4
HIT_BURN_IN = 100
HIT_MEAN_MAX = 0.2
CALIBRATION_RUNS = 100
CALIBRATION_REPLICAS = 1000
CALIBRATION_MIN_COVERED = 95

DLAMBDA_CORPUS = (
    "1:1",
    "1:2",
    "1:8",
    "1/2:0,1/2:1",
    "1/2:1,1/2:3",
    "3/4:1,1/4:3",
    "1/2:2,1/2:7",
    "1/4:0,3/4:4",
    "9/10:1,1/10:10",
    "1/3:0,1/3:2,1/3:5",
)

EMBEDDED_LAW = "3/4:1,1/4:3"
EMBEDDED_INCREMENTS = 10**5
QKN2_LAW = "3/4:1,1/4:16"
QKN2_GRID = (1, 16, 64, 256)
SERIES_LAW = "1:1"
SERIES_GRID = (1, 2, 4, 8, 16, 32, 64, 128, 256)
LOG_SERIES_Q = (0.5, 0.1, 0.01)


class SuiteOutput(NamedTuple):
    rows: List[CheckRow]
    replicas: Dict[str, int]
    outputs: List[Path]


def _count_row(name: str, summary: str, passed: int, total: int) -> CheckRow:
    return CheckRow(
        check_name=name, param_summary=summary, lhs=passed, rhs=total, margin=passed - total, holds=passed == total
    )


def _range_row(name: str, summary: str, value: float, lo: float, hi: float) -> CheckRow:
    """lo <= value <= hi。rhs は近い方の端"""
    near = lo if value - lo < hi - value else hi
    return CheckRow(
        check_name=name,
        param_summary=f"{summary},range=[{lo},{hi}]",
        lhs=value,
        rhs=near,
        margin=min(value - lo, hi - value),
        holds=lo <= value <= hi,
    )


def _failed_row(name: str, summary: str, reason: str) -> CheckRow:
    logger.error(f"{name}[{summary}]: {reason}")
    return CheckRow(check_name=name, param_summary=f"{summary},error={reason}", holds=False)


def _rng(config: RunConfig, check: str, index: int = 0) -> np.random.Generator:
    return stream(config.master_seed, f"verify/{check}", index)


def random_mixture(rng: np.random.Generator, max_levels: int, max_height: int) -> WaitingTimeLaw:
    """整数重みを正規化した R[0,y] の混合（高さは相異なる）"""
    L = int(rng.integers(1, min(max_levels, max_height + 1) + 1))
    heights = sorted(int(y) for y in rng.choice(max_height + 1, L, replace=False))
    weights = [int(w) for w in rng.integers(1, 21, L)]
    total = sum(weights)
    return WaitingTimeLaw.from_pairs((Fraction(w, total), y) for w, y in zip(weights, heights))


def random_symmetric_unimodal(rng: np.random.Generator, max_radius: int = 20) -> Tuple[LatticePMF, float]:
    """
    対称な一様分布 R[-a,a] の混合で σ >= 1 のもの

    σ < 1 の混合は引き直す。
    """
    while True:
        parts = int(rng.integers(1, 4))
        radii = rng.integers(1, max_radius + 1, parts)
        weights = rng.integers(1, 11, parts)
        total = int(weights.sum())
        mu = mix([(Fraction(int(w), total), uniform_pmf(-int(a), int(a))) for w, a in zip(weights, radii)])
        sigma = math.sqrt(float(moments(mu).variance))
        if sigma >= 1:
            return mu, sigma


# ======================
# lemmas
# ======================


def lemmas_suite(
    config: RunConfig,
    momest_laws: int = MOMEST_LAWS,
    unimod_laws: int = UNIMOD_LAWS,
    unimodest_laws: int = UNIMODEST_LAWS,
    maxest_m: Sequence[int] = MAXEST_M,
) -> SuiteOutput:
    rows: List[CheckRow] = []

    rng = _rng(config, "momest")
    worst, passed, corollary = 0.0, 0, 0
    for _ in range(momest_laws):
        result = check_momest(as_pmf(random_mixture(rng, 4, 50)))
        worst = max(worst, float(result.lhs / result.rhs) if result.rhs else 0.0)
        passed += result.holds
        corollary += result.corollary_holds
    rows.append(
        CheckRow.inequality("momest", f"laws={momest_laws},worst_ratio", worst, 1.0, passed == momest_laws, False)
    )
    rows.append(_count_row("momest_corollary", f"laws={momest_laws}", corollary, momest_laws))

    rng = _rng(config, "unimod")
    passed = sum(check_unimod(as_pmf(random_mixture(rng, 3, 6)), 20).holds for _ in range(unimod_laws))
    rows.append(_count_row("unimod", f"laws={unimod_laws},g_max=20", passed, unimod_laws))

    rng = _rng(config, "unimodest")
    worst_ratio, constant, passed = math.inf, 0.0, 0
    for _ in range(unimodest_laws):
        mu, sigma = random_symmetric_unimodal(rng)
        # 区間は開なので比が最小になるのは整数の c
        result = check_unimodest(mu, list(range(1, math.floor(sigma) + 1)))
        worst_ratio = min(worst_ratio, result.min_ratio)
        constant = result.constant
        passed += result.holds
    rows.append(
        CheckRow.inequality(
            "unimodest", f"laws={unimodest_laws},min_ratio", worst_ratio, constant, passed == unimodest_laws
        )
    )

    table = check_maxest(MAXEST_Y, maxest_m)
    summary = f"y={list(MAXEST_Y)},m=1..{max(maxest_m)}"
    rows.append(
        CheckRow.inequality("maxest", summary, table.supremum, MAXEST_SUP, table.supremum <= MAXEST_SUP, False)
    )
    maxest_path = config.out_dir / "verify_maxest.csv"
    with open(maxest_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["y", "m", "statistic"])
        writer.writerows([c.y, c.m, format_number(c.statistic)] for c in table.cells)

    for system in standard_event_systems():
        r_grid = list(range(system.horizon + 2))
        try:
            report = check_recurrevents(system, r_grid)
        except HypothesisViolation as e:
            rows.append(_failed_row("recurrevents", system.name, f"witness={e.witness}"))
            continue
        margin = min(float(row.prob_phi_gt_r - row.bound) for row in report.rows)
        summary = f"{system.name},E_phi={float(report.expected_phi):.6g}"
        rows.append(CheckRow.inequality("recurrevents", summary, margin, 0.0, report.holds))

    violator = sticky_violator()
    try:
        check_recurrevents(violator, [0, 1])
        rows.append(_failed_row("recurrevents_violator", violator.name, "violation not detected"))
    except HypothesisViolation as e:
        summary = f"{violator.name},witness={e.witness}"
        rows.append(CheckRow(check_name="recurrevents_violator", param_summary=summary, holds=True))

    return SuiteOutput(rows, {}, [maxest_path])


# ======================
# scaling
# ======================


def _slope_row(name: str, summary: str, n_grid, estimates, lo: float, hi: float, confidence) -> CheckRow:
    """フィットした傾きが [lo, hi] にあるか（lo = -inf なら上限だけ）"""
    fit = fit_or_none(n_grid, estimates, confidence)
    if fit is None:
        return _failed_row(name, summary, "too few positive estimates")
    if math.isinf(lo):
        return CheckRow.inequality(name, summary, fit.slope, hi, fit.slope <= hi, False)
    return _range_row(name, summary, fit.slope, lo, hi)


def _point_rows(series: str, n_grid, estimates) -> List[list]:
    return [
        [series, n, format_number(e.point), format_number(e.ci_lo), format_number(e.ci_hi)]
        for n, e in zip(n_grid, estimates)
    ]


def scaling_suite(
    config: RunConfig,
    hit_paths: int = HIT_PATHS,
    hit_length: int = HIT_PATH_LENGTH,
    calibration_runs: int = CALIBRATION_RUNS,
) -> SuiteOutput:
    rows: List[CheckRow] = []
    replicas: Dict[str, int] = {}
    lazy = lazy_walk_pmf(PMFMode.FLOAT)
    confidence = config.confidence

    exact = [EstimateWithCI.exact(p) for p in return_probabilities(lazy, EXACT_RETURN_GRID)]
    rows.append(_slope_row("scaling_return_exact", "lazy,d=1", EXACT_RETURN_GRID, exact, -0.56, -0.44, confidence))
    point_rows = _point_rows("lazy_return_exact", EXACT_RETURN_GRID, exact)

    gates = [
        ("scaling_level_crossing", EventSpec(EventKind.LEVEL_CROSSING, lazy, d=1), LEVEL_CROSSING_GRID, -0.60, -0.40),
        ("scaling_box_visit", EventSpec(EventKind.BOX_VISIT, lazy, d=2, box=Box.cube(2)), BOX_GRID, -1.15, -0.85),
        ("scaling_segment_hit", EventSpec(EventKind.SEGMENT_HIT, lazy, d=3, box=Box.cube(3)), BOX_GRID, -math.inf, -1.3),
    ]
    for name, spec, grid, lo, hi in gates:
        logger.info(f"{name}: n={list(grid)}, replicas={config.replicas}")
        estimates = estimate_over_grid(
            spec, grid, config.replicas, config.master_seed, f"verify/{name}", config.workers, confidence
        )
        replicas[name] = config.replicas
        point_rows += _point_rows(name, grid, estimates)
        rows.append(_slope_row(name, f"d={spec.d}", grid, estimates, lo, hi, confidence))

    # 座標ごとの区間ヒット確率の 3 乗（独立性による上界）
    per_coord = estimate_over_grid(
        EventSpec(EventKind.INTERVAL_HIT, lazy, d=1),
        BOX_GRID,
        config.replicas,
        config.master_seed,
        "verify/scaling_interval_hit",
        config.workers,
        confidence,
    )
    cubed = [EstimateWithCI(e.point**3, e.ci_lo**3, e.ci_hi**3, e.replicas, e.successes) for e in per_coord]
    point_rows += _point_rows("interval_hit_cubed", BOX_GRID, cubed)

    points_path = config.out_dir / "verify_scaling_points.csv"
    with open(points_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["series", "n", "p_hat", "ci_lo", "ci_hi"])
        writer.writerows(point_rows)

    paths = min(hit_paths, config.replicas)
    cube = Box.cube(3)
    mean_hits = mean_polygonal_hits(lazy, 3, paths, hit_length, HIT_BURN_IN, cube, _rng(config, "mean_hits"))
    replicas["mean_polygonal_hits"] = paths
    summary = f"d=3,paths={paths},length={hit_length},burn_in={HIT_BURN_IN}"
    rows.append(
        CheckRow.inequality("mean_polygonal_hits", summary, mean_hits, HIT_MEAN_MAX, mean_hits <= HIT_MEAN_MAX, False)
    )

    values = [dlambda_sup(law_from_spec(text), Fraction(1, 4), 3) for text in DLAMBDA_CORPUS]
    worst = max(float(v.value) for v in values)
    holds = all(v.non_degenerate for v in values)
    rows.append(CheckRow.inequality("dlambda_sup", f"laws={len(values)},lambda=1/4,d=3", worst, 1.0, holds, False))

    # 厳密値 3/8 を含む区間の数
    spec = EventSpec(EventKind.RETURN, lazy, d=1)
    covered = 0
    for r in range(calibration_runs):
        est = estimate_event_prob(spec, 2, CALIBRATION_REPLICAS, _rng(config, "calibration", r), confidence)
        covered += est.ci_lo <= 0.375 <= est.ci_hi
    replicas["mc_calibration"] = CALIBRATION_REPLICAS
    minimum = math.ceil(calibration_runs * CALIBRATION_MIN_COVERED / CALIBRATION_RUNS)
    summary = f"runs={calibration_runs},P(S_2=0)=3/8"
    rows.append(CheckRow.inequality("mc_calibration", summary, covered, minimum, covered >= minimum))

    return SuiteOutput(rows, replicas, [points_path])


# ======================
# params
# ======================


def params_suite(config: RunConfig) -> SuiteOutput:
    params = construct_params(config.a_constant, 5)
    report = validate_params(params)
    rows = [
        CheckRow(
            check_name=f"params_{c.constraint}",
            param_summary=f"k={c.k}",
            lhs=float(c.slack),
            rhs=0.0,
            margin=float(c.slack),
            holds=c.holds,
        )
        for c in report.checks
    ]
    level2 = params.level(2)
    c2 = level2.c_exact if level2.c_exact is not None else -1
    rows.append(
        CheckRow(check_name="params_c2", param_summary="k=2", lhs=c2, rhs=4097, margin=c2 - 4097, holds=c2 == 4097)
    )
    y2 = level2.y_exact if level2.y_exact is not None else -1
    rows.append(CheckRow.inequality("params_y2", "k=2", y2, 98328, y2 >= 98328))
    return SuiteOutput(rows, {}, [])


# ======================
# embedded
# ======================


def embedded_suite(config: RunConfig, increments: int = EMBEDDED_INCREMENTS) -> SuiteOutput:
    rows: List[CheckRow] = []
    law = law_from_spec(EMBEDDED_LAW)
    # 1 つの埋め込み増分は平均 3 フェーズ
    phases = 3 * increments + 1000
    full = DRWConfig(d=2, law=law, rule=DRWRule.FULL, phases=phases)
    trace = simulate_drw(full, _rng(config, "embedded"))
    steps = np.diff(embedded_walk(trace, close_final_run=False).positions, axis=0)
    if len(steps) < increments:
        logger.warn(f"embedded: 増分が {len(steps)} < {increments}")
    steps = steps[:increments]
    summary = f"law={EMBEDDED_LAW},increments={len(steps)}"

    x_law = law_of_X(as_pmf(law)).law
    for axis, name in ((0, "horizontal"), (1, "vertical")):
        result = chi_square_against_pmf(steps[:, axis], x_law)
        rows.append(
            CheckRow.inequality(f"embedded_chi2_{name}", summary, result.pvalue, 0.01, result.pvalue > 0.01)
        )
    result = independence_test(steps[:, 0], steps[:, 1])
    rows.append(CheckRow.inequality("embedded_independence", summary, result.pvalue, 0.001, result.pvalue > 0.001))

    runs = horizontal_run_lengths(trace)
    mean = float(runs.mean())
    se = math.sqrt(0.75 / len(runs))
    gap = abs(mean - 1.5)
    summary = f"runs={len(runs)},mean=3/2"
    rows.append(CheckRow.inequality("embedded_run_length", summary, gap, 3 * se, gap <= 3 * se, False))

    modified = DRWConfig(d=3, law=law, rule=DRWRule.PERPENDICULAR, phases=increments)
    perpendicular = simulate_drw(modified, _rng(config, "embedded_perpendicular"))
    result = symmetry_test(vertical_run_increments(perpendicular, axis=2))
    summary = f"d=3,phases={increments}"
    rows.append(CheckRow.inequality("perpendicular_symmetry", summary, result.pvalue, 0.001, result.pvalue > 0.001))

    replayed = all(np.array_equal(t.replay(), t.final_position) for t in (trace, perpendicular))
    rows.append(CheckRow(check_name="drw_replay", param_summary="full,perpendicular", holds=replayed))
    return SuiteOutput(rows, {"embedded": len(steps), "perpendicular": increments}, [])


# ======================
# qkn2
# ======================


def qkn2_suite(config: RunConfig) -> SuiteOutput:
    law = law_from_spec(QKN2_LAW)
    A = compute_A() if config.a_constant is None else config.a_constant
    rng = _rng(config, "qkn2")
    results = check_qkn2(law, A, QKN2_GRID, config.replicas, rng, confidence=config.confidence)
    rows: List[CheckRow] = []
    for r in results:
        summary = f"n={r.n},escalated={r.escalated}"
        rows.append(CheckRow.inequality("qkn2", summary, r.s2.ci_hi, r.bound, r.holds, False))
        if r.s2_exact is not None:
            exact_holds = r.s2_exact <= r.bound
            rows.append(CheckRow.inequality("qkn2_exact", f"n={r.n}", r.s2_exact, r.bound, exact_holds, False))

    qkn2_path = config.out_dir / "verify_qkn2.csv"
    with open(qkn2_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["n", "s1", "s2_hat", "s2_ci_lo", "s2_ci_hi", "s2_exact", "bound", "holds", "escalated"])
        for r in results:
            writer.writerow(
                [
                    r.n,
                    format_number(r.s1),
                    format_number(r.s2.point),
                    format_number(r.s2.ci_lo),
                    format_number(r.s2.ci_hi),
                    format_number(r.s2_exact),
                    format_number(r.bound),
                    "true" if r.holds else "false",
                    "true" if r.escalated else "false",
                ]
            )

    for c in (1, 4, 8, 15):
        tail = check_tail_bound(law, 2, c)
        rows.append(CheckRow.inequality("tail_bound", f"k=2,c={c}", tail.lhs, tail.rhs, tail.holds))

    l2_path = config.out_dir / "verify_qkn2_l2.csv"
    with open(l2_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["k", "lhs", "rhs", "step_term", "tail", "holds"])
        for r in l2_recursion_diagnostic(law, float(law.p(2)) / 2, A):
            values = [format_number(v) for v in (r.lhs, r.rhs, r.step_term, r.tail)]
            writer.writerow([r.k, *values, "true" if r.holds else "false"])
    replicas = {"qkn2": config.replicas}
    if any(r.escalated for r in results):
        replicas["qkn2_escalated"] = config.replicas * 10
    return SuiteOutput(rows, replicas, [qkn2_path, l2_path])


# ======================
# series
# ======================


def series_suite(config: RunConfig) -> SuiteOutput:
    rows: List[CheckRow] = []
    law = law_from_spec(SERIES_LAW)
    x_law = to_floating(law_of_X(as_pmf(law)).law)

    returns = return_probabilities(x_law, SERIES_GRID)
    signs = [sign_change_probability(x_law, n) for n in SERIES_GRID]
    sums = series_partial_sums(
        [(n, p, (p, p)) for n, p in zip(SERIES_GRID, returns)],
        [(n, q, (q, q)) for n, q in zip(SERIES_GRID, signs) if q > 0],
    )
    series_path = config.out_dir / "verify_series.csv"
    with open(series_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["n", "sum_sq", "sum_sq_lo", "sum_sq_hi", "sum_cross", "sum_cross_lo", "sum_cross_hi"])
        writer.writerows([s.n, *[format_number(v) for v in s[1:]]] for s in sums)

    for q in LOG_SERIES_Q:
        result = check_log_series(q)
        rows.append(CheckRow.inequality("log_series", f"q={q}", result.series, result.closed_form, result.holds))

    alpha = 0.1
    replicas = max(config.replicas, MIN_REPLICAS)
    for n in (16, 64):
        rng = _rng(config, "quantile_bound", n)
        result = check_quantile_bound(x_law, alpha, n, replicas, rng, confidence=config.confidence)
        summary = f"law={SERIES_LAW},alpha={alpha},n={n},gamma={result.gamma}"
        rows.append(CheckRow.inequality("quantile_bound", summary, result.lhs.ci_hi, result.rhs.ci_lo, result.holds))
        exact = sign_change_probability(x_law, n)
        rows.append(_range_row("sign_change_exact_in_ci", f"n={n}", exact, result.lhs.ci_lo, result.lhs.ci_hi))
    return SuiteOutput(rows, {"quantile_bound": replicas}, [series_path])


# ======================
# streams
# ======================


def streams_suite(config: RunConfig) -> SuiteOutput:
    audit = collision_audit(config.master_seed, "verify/streams", config.replicas)
    rows = [
        CheckRow(
            check_name="stream_collisions",
            param_summary=f"streams={audit.streams}",
            lhs=audit.duplicates,
            rhs=0,
            margin=-audit.duplicates,
            holds=audit.passed,
        )
    ]

    spec = EventSpec(EventKind.RETURN, lazy_walk_pmf(PMFMode.FLOAT), d=1)
    grid = (4, 8, 16)
    replicas = max(config.replicas, MIN_REPLICAS)
    many = max(config.workers, 2)
    single = estimate_over_grid(spec, grid, replicas, config.master_seed, "verify/streams_determinism", 1)
    parallel = estimate_over_grid(spec, grid, replicas, config.master_seed, "verify/streams_determinism", many)
    summary = f"workers=1 vs {many}"
    rows.append(CheckRow(check_name="worker_determinism", param_summary=summary, holds=single == parallel))
    return SuiteOutput(rows, {"worker_determinism": replicas}, [])


SUITES: Dict[Suite, Callable[[RunConfig], SuiteOutput]] = {
    Suite.LEMMAS: lemmas_suite,
    Suite.SCALING: scaling_suite,
    Suite.PARAMS: params_suite,
    Suite.EMBEDDED: embedded_suite,
    Suite.QKN2: qkn2_suite,
    Suite.SERIES: series_suite,
    Suite.STREAMS: streams_suite,
}


def cmd_verify(config: RunConfig) -> CommandResult:
    """
    選択したスイートを実行し verify_checks.csv と verify_summary.json を書き出す
    """
    if config.suite is None:
        raise PreconditionViolation("suite が必要")
    selected = list(SUITES) if config.suite == Suite.ALL else [config.suite]
    rows: List[CheckRow] = []
    replicas: Dict[str, int] = {}
    outputs: List[Path] = []
    for suite in selected:
        logger.info(f"=== suite: {suite.value} ===")
        result = SUITES[suite](config)
        failed = sum(not r.holds for r in result.rows)
        message = f"{suite.value}: {len(result.rows) - failed}/{len(result.rows)} 成立"
        if failed:
            logger.error(message)
        else:
            logger.success(message)
        rows += result.rows
        replicas.update(result.replicas)
        outputs += result.outputs

    checks_path = config.out_dir / "verify_checks.csv"
    write_check_csv(rows, checks_path)
    summary_path = config.out_dir / "verify_summary.json"
    write_summary_json(summarize(config.suite.value, config.master_seed, rows, replicas), summary_path)
    checks = {f"{r.check_name}[{r.param_summary}]": r.holds for r in rows}
    return CommandResult([checks_path, summary_path, *outputs], checks)
