"""
補題オラクル・事象系・統計・推定式チェックのテスト
"""

import csv
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from src.polygonal_walks.distributions import LatticePMF, PMFMode, point_mass, uniform_pmf
from src.polygonal_walks.exceptions import HypothesisViolation, PreconditionViolation
from src.polygonal_walks.hierarchy import law_from_spec
from src.polygonal_walks.verification import (
    CheckRow,
    EstimateWithCI,
    EventSpec,
    abs_quantile,
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
    discrete_unimodal_constant,
    estimate_event_prob,
    fit_exponent,
    independence_test,
    l2_recursion_diagnostic,
    phi_distribution,
    return_probabilities,
    series_partial_sums,
    sign_change_probability,
    standard_event_systems,
    sticky_violator,
    summarize,
    symmetry_test,
    verify_hypothesis,
    wilson_interval,
    write_check_csv,
    write_summary_json,
)
from src.polygonal_walks.verification.event_systems import EventSystem, bernoulli_system
from src.polygonal_walks.walks import Box, EventKind, lazy_walk_pmf

F = Fraction


# ======================
# 補題オラクル
# ======================


def test_momest_uniform():
    assert check_momest(uniform_pmf(0, 1)) == (F(1, 4), F(3, 8), True, True)


def test_momest_equality_case():
    # 一様分布 R[0,y] の (E T)^2 / E T^2 は y -> ∞ で 3/4 に近づく
    result = check_momest(uniform_pmf(0, 1000))
    assert result.holds
    assert float(result.lhs / result.rhs) > 0.99


def test_momest_requires_nonincreasing():
    with pytest.raises(PreconditionViolation):
        check_momest(LatticePMF.from_weights(0, ["1/4", "3/4"]))
    with pytest.raises(PreconditionViolation):
        check_momest(uniform_pmf(-1, 1))


def test_unimod():
    report = check_unimod(uniform_pmf(0, 2), g_max=6)
    assert report.symmetric and report.unimodal
    assert report.var_pmf == report.var_wald
    assert report.holds


def test_unimodest():
    result = check_unimodest(uniform_pmf(-5, 5), [1.0, 2.0, 3.0])
    assert result.constant == pytest.approx(discrete_unimodal_constant())
    # 2√3/9 · (1 - 1/√3) · 3/√10
    assert discrete_unimodal_constant() == pytest.approx(0.15433, abs=1e-4)
    assert result.holds


def test_unimodest_preconditions():
    with pytest.raises(PreconditionViolation):
        check_unimodest(uniform_pmf(-5, 5), [4.0])  # c > σ = √10
    with pytest.raises(PreconditionViolation):
        check_unimodest(uniform_pmf(0, 4), [1.0])
    with pytest.raises(PreconditionViolation):
        check_unimodest(point_mass(0), [1.0])


def test_maxest():
    table = check_maxest([1], [1, 2])
    assert [c.statistic for c in table.cells] == pytest.approx([0.5, math.sqrt(2) / 2])
    assert table.supremum == pytest.approx(math.sqrt(2) / 2)


# ======================
# 事象系
# ======================


def test_recurrevents_bernoulli():
    report = check_recurrevents(bernoulli_system(F(3, 10), 10), range(12))
    # Φ = 1 + Bin(10, 3/10)
    assert report.expected_phi == 4
    assert report.holds
    assert report.rows[0].prob_phi_gt_r == 1


def test_phi_distribution_sums_to_one():
    phi = phi_distribution(bernoulli_system(F(1, 2), 6))
    assert sum(phi.values()) == 1
    assert phi[1] == F(1, 64)
    assert phi[7] == F(1, 64)


def test_standard_systems_hold():
    systems = standard_event_systems()
    assert len(systems) == 21
    for system in systems[:11]:
        assert check_recurrevents(system, range(system.horizon + 2)).holds


def test_sticky_violator_witness():
    with pytest.raises(HypothesisViolation) as info:
        verify_hypothesis(sticky_violator())
    assert info.value.witness == (1, 2, 1)


def test_random_start_violates_at_time_zero():
    # 初期状態がその後の事象を決める連鎖
    system = EventSystem(
        "frozen", [(F(1, 2), 0), (F(1, 2), 1)], lambda s: [(F(1), s)], lambda n, s: s == 1, 4
    )
    with pytest.raises(HypothesisViolation) as info:
        verify_hypothesis(system)
    assert info.value.witness == (0, 1, 1)
    verify_hypothesis(bernoulli_system(F(1, 3), 5))


def test_event_system_preconditions():
    with pytest.raises(PreconditionViolation):
        bernoulli_system(F(1, 2), 17)
    with pytest.raises(PreconditionViolation):
        EventSystem("bad", [(F(1, 2), 0)], lambda s: [(F(1), s)], lambda n, s: True, 4)


# ======================
# 統計
# ======================


def test_wilson_interval():
    lo, hi = wilson_interval(5, 10, 0.95)
    assert lo < 0.5 < hi
    assert lo + hi == pytest.approx(1.0)
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    with pytest.raises(PreconditionViolation):
        wilson_interval(1, 0)
    with pytest.raises(PreconditionViolation):
        wilson_interval(1, 10, 1.5)


def test_chi_square_against_pmf(rng):
    pmf = uniform_pmf(-3, 3)
    samples = pmf.sample(20_000, rng)
    assert chi_square_against_pmf(samples, pmf).pvalue > 0.001
    shifted = chi_square_against_pmf(samples + 1, pmf)
    assert shifted.pvalue == 0.0


def test_independence_and_symmetry(rng):
    a = rng.integers(-2, 3, 5000)
    b = rng.integers(-2, 3, 5000)
    assert independence_test(a, b).pvalue > 0.001
    assert independence_test(a, a).pvalue < 1e-6
    with pytest.raises(PreconditionViolation):
        independence_test(a, b[:10])
    assert symmetry_test(np.ones(50)).pvalue < 1e-6
    assert symmetry_test(np.zeros(10)).pvalue == 1.0


def test_fit_exponent_exact_points():
    samples = [(n, 2 * n**-0.5, (2 * n**-0.5, 2 * n**-0.5)) for n in (4, 16, 64, 256)]
    fit = fit_exponent(samples)
    assert fit.slope == pytest.approx(-0.5, abs=1e-9)
    assert fit.intercept == pytest.approx(math.log(2), abs=1e-9)
    assert fit.points_used == 4


def test_fit_exponent_weighted():
    samples = []
    for n in (16, 32, 64, 128, 256):
        est = EstimateWithCI.from_counts(int(round(100_000 / n)), 100_000, 0.99)
        samples.append((n, est.point, (est.ci_lo, est.ci_hi)))
    fit = fit_exponent(samples, 0.99)
    assert fit.slope_ci[0] <= -1.0 <= fit.slope_ci[1]


def test_fit_exponent_needs_points():
    samples = [(1, 0.5, (0.4, 0.6)), (2, 0.0, (0.0, 0.1)), (4, 0.2, (0.1, 0.3))]
    with pytest.raises(PreconditionViolation):
        fit_exponent(samples)


# ======================
# 推定
# ======================


def test_estimate_with_ci_invariants():
    with pytest.raises(PreconditionViolation):
        EstimateWithCI(0.5, 0.6, 0.7, 10, 5)
    est = EstimateWithCI.from_counts(30, 100, 0.99)
    assert est.ci_lo <= 0.3 <= est.ci_hi
    assert est.scaled(0.5).point == pytest.approx(0.15)


def test_estimate_event_prob_calibrated(rng):
    spec = EventSpec(EventKind.RETURN, lazy_walk_pmf(PMFMode.FLOAT), d=1)
    est = estimate_event_prob(spec, 2, 20_000, rng, 0.999)
    assert est.ci_lo <= 0.375 <= est.ci_hi


def test_estimate_event_prob_degenerate(rng):
    still = point_mass(0, PMFMode.FLOAT)
    assert estimate_event_prob(EventSpec(EventKind.RETURN, still), 5, 100, rng).point == 1.0
    assert estimate_event_prob(EventSpec(EventKind.SIGN_CHANGE, still), 5, 100, rng).point == 0.0
    box = EventSpec(EventKind.SEGMENT_HIT, still, d=2, box=Box.cube(2))
    assert estimate_event_prob(box, 5, 100, rng).ci_lo == 1.0


def test_estimate_event_prob_preconditions(rng):
    spec = EventSpec(EventKind.RETURN, lazy_walk_pmf(PMFMode.FLOAT))
    with pytest.raises(PreconditionViolation):
        estimate_event_prob(spec, 2, 99, rng)
    with pytest.raises(PreconditionViolation):
        EventSpec(EventKind.V_N, lazy_walk_pmf(PMFMode.FLOAT), d=3)
    with pytest.raises(PreconditionViolation):
        EventSpec(EventKind.BOX_VISIT, lazy_walk_pmf(PMFMode.FLOAT), d=2)


# ======================
# 推定式
# ======================


def test_return_probabilities():
    assert return_probabilities(lazy_walk_pmf(), [1, 2]) == pytest.approx([0.5, 0.375])


def test_sign_change_probability():
    # S_1 = ±1 から X <= ∓2 に跳ぶ確率 (1/5)(1/5) が 2 通り
    assert sign_change_probability(uniform_pmf(-2, 2), 1) == pytest.approx(0.08)
    assert sign_change_probability(lazy_walk_pmf(), 3) == 0.0


def test_sign_change_probability_matches_simulation(rng):
    spec = EventSpec(EventKind.SIGN_CHANGE, uniform_pmf(-2, 2, PMFMode.FLOAT))
    est = estimate_event_prob(spec, 6, 50_000, rng, 0.999)
    assert est.ci_lo <= sign_change_probability(uniform_pmf(-2, 2), 6) <= est.ci_hi


def test_abs_quantile():
    lazy = lazy_walk_pmf()
    assert abs_quantile(lazy, 0.4) == 1
    assert abs_quantile(lazy, 0.6) == 0
    with pytest.raises(PreconditionViolation):
        abs_quantile(lazy, 1.0)


def test_quantile_bound(rng):
    result = check_quantile_bound(uniform_pmf(-2, 2, PMFMode.FLOAT), 0.1, 8, 20_000, rng)
    assert result.quantile == 2
    assert result.gamma == 1
    assert result.holds


def test_quantile_bound_degenerate(rng):
    result = check_quantile_bound(point_mass(0, PMFMode.FLOAT), 0.1, 8, 100, rng)
    assert result.holds
    assert not result.literal_holds


def test_qkn2(rng):
    law = law_from_spec("3/4:1,1/4:16")
    rows = check_qkn2(law, None, [16, 64], 4000, rng, g_max=12, confidence=0.9999)
    assert [r.n for r in rows] == [16, 64]
    for r in rows:
        assert r.holds
        assert r.s2_exact is not None
        assert r.s2.ci_lo <= r.s2_exact <= r.s2.ci_hi or r.escalated
    with pytest.raises(PreconditionViolation):
        check_qkn2(law_from_spec("1:1"), None, [4], 100, rng)


def test_tail_bound():
    law = law_from_spec("3/4:1,1/4:16")
    for c in (1, 4, 8, 15):
        assert check_tail_bound(law, 2, c, g_max=8).holds
    with pytest.raises(PreconditionViolation):
        check_tail_bound(law, 2, 0)


def test_l2_diagnostic():
    rows = l2_recursion_diagnostic(law_from_spec("3/4:1,1/4:16"), 0.125, n_max=32, g_max=10)
    assert [r.k for r in rows] == [1, 2]
    assert rows[0].step_term is None
    assert rows[1].step_term > 0
    assert all(r.tail >= 0 for r in rows)


def test_series_partial_sums():
    points = [(1, 0.5, (0.5, 0.5)), (4, 0.25, (0.25, 0.25))]
    rows = series_partial_sums(points, points)
    assert [r.n for r in rows] == [1, 2, 3, 4]
    # p_n = n^{-1/2}/2 を補間するので Σ p_n^2 = (1 + 1/2 + 1/3 + 1/4)/4
    assert rows[-1].sum_sq == pytest.approx((1 + 1 / 2 + 1 / 3 + 1 / 4) / 4)
    assert rows[-1].sum_cross == pytest.approx(rows[-1].sum_sq)
    assert series_partial_sums(points)[0].sum_cross is None
    with pytest.raises(PreconditionViolation):
        series_partial_sums(points[:1])


@pytest.mark.parametrize("q", [0.5, 0.1, 0.01])
def test_log_series(q):
    result = check_log_series(q)
    assert result.holds
    assert result.closed_form == pytest.approx(math.log(1 / q))


# ======================
# レポート
# ======================


def test_report_files(tmp_path):
    rows = [
        CheckRow.inequality("a", "x=1", 2, 1, True),
        CheckRow.inequality("b", "x=2", 2, 1, False, larger_is_lhs=False),
        CheckRow(check_name="c", param_summary="", holds=True),
    ]
    assert rows[1].margin == -1.0
    csv_path = tmp_path / "checks.csv"
    write_check_csv(rows, csv_path)
    with open(csv_path, encoding="utf-8") as f:
        table = list(csv.reader(f))
    assert table[0] == ["check_name", "param_summary", "lhs", "rhs", "margin", "holds"]
    assert table[2] == ["b", "x=2", "2.0", "1.0", "-1.0", "false"]
    assert table[3][2:5] == ["", "", ""]

    summary = summarize("lemmas", 7, rows, {"b": 10})
    assert summary.failed == 1
    assert summary.failures == ["b[x=2]"]
    json_path = tmp_path / "summary.json"
    write_summary_json(summary, json_path)
    assert json.loads(json_path.read_text(encoding="utf-8"))["total"] == 3
