"""
確率質量関数（厳密・浮動小数点）のテスト
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from src.polygonal_walks.config import settings
from src.polygonal_walks.distributions import (
    LatticePMF,
    PMFMode,
    alternating_sum_law,
    concentration,
    convolution_power,
    convolve,
    dumps_pmf,
    interval_mass,
    is_symmetric_unimodal,
    law_of_X,
    load_pmf,
    loads_pmf,
    mix,
    moments,
    point_mass,
    prob_abs_greater,
    reflect,
    save_pmf,
    to_floating,
    uniform_pmf,
    zero_mass,
)
from src.polygonal_walks.exceptions import (
    InvalidDistributionError,
    InvalidIntervalError,
    InvalidMixtureError,
    PreconditionViolation,
    SupportOverflowError,
)

F = Fraction


@st.composite
def exact_pmfs(draw):
    raw = draw(st.lists(st.integers(0, 5), min_size=1, max_size=6).filter(any))
    offset = draw(st.integers(-4, 4))
    total = sum(raw)
    return LatticePMF.from_weights(offset, [F(w, total) for w in raw])


@st.composite
def symmetric_unimodal_pmfs(draw):
    """中心化した一様分布 R[-a,a] の混合"""
    radii = draw(st.lists(st.integers(0, 4), min_size=1, max_size=3))
    weights = draw(st.lists(st.integers(1, 5), min_size=len(radii), max_size=len(radii)))
    total = sum(weights)
    return mix([(F(w, total), uniform_pmf(-a, a)) for w, a in zip(weights, radii)])


# ======================
# 構築
# ======================


def test_uniform_pmf():
    p = uniform_pmf(-1, 2)
    assert p.support_min == -1
    assert p.support_max == 2
    assert [w for _, w in p.items()] == [F(1, 4)] * 4
    assert p.prob(5) == 0


def test_uniform_pmf_rejects_empty_interval():
    with pytest.raises(InvalidIntervalError):
        uniform_pmf(3, 1)


def test_from_weights_trims_zero_ends():
    p = LatticePMF.from_weights(-2, [0, F(1, 2), 0, F(1, 2), 0])
    assert p.offset == -1
    assert len(p) == 3
    assert p.prob(0) == 0


def test_invalid_weights():
    with pytest.raises(InvalidDistributionError):
        LatticePMF.from_weights(0, [F(1, 2), F(1, 4)])
    with pytest.raises(InvalidDistributionError):
        LatticePMF.from_weights(0, [0, 0])


def test_float_weights_are_read_only():
    p = uniform_pmf(0, 3, PMFMode.FLOAT)
    assert not p.weights.flags.writeable
    assert p.as_array().sum() == pytest.approx(1.0)


def test_support_cap(monkeypatch):
    monkeypatch.setattr(settings, "max_support_atoms", 10)
    with pytest.raises(SupportOverflowError):
        uniform_pmf(0, 20)
    with pytest.raises(SupportOverflowError):
        convolution_power(uniform_pmf(0, 5), 3)


# ======================
# 演算
# ======================


def test_mix():
    p = mix([(F(1, 2), point_mass(0)), (F(1, 2), point_mass(2))])
    assert p.offset == 0
    assert p.weights == (F(1, 2), F(0), F(1, 2))


def test_mix_rejects_bad_weights():
    with pytest.raises(InvalidMixtureError):
        mix([(F(1, 2), point_mass(0)), (F(1, 3), point_mass(1))])
    with pytest.raises(InvalidMixtureError):
        mix([(F(-1, 2), point_mass(0)), (F(3, 2), point_mass(1))])


@given(exact_pmfs(), exact_pmfs())
def test_convolve_commutes(p, q):
    assert convolve(p, q) == convolve(q, p)


@given(exact_pmfs(), exact_pmfs(), exact_pmfs())
def test_convolve_associates(p, q, r):
    assert convolve(convolve(p, q), r) == convolve(p, convolve(q, r))


@given(exact_pmfs())
def test_reflect_is_involution(p):
    assert reflect(reflect(p)) == p


@given(exact_pmfs(), exact_pmfs())
def test_reflect_distributes_over_convolve(p, q):
    assert reflect(convolve(p, q)) == convolve(reflect(p), reflect(q))


@hyp_settings(max_examples=200)
@given(symmetric_unimodal_pmfs(), symmetric_unimodal_pmfs())
def test_symmetric_unimodal_closed_under_convolve(p, q):
    shape = is_symmetric_unimodal(convolve(p, q))
    assert shape.symmetric
    assert shape.unimodal


@given(exact_pmfs())
def test_convolution_power_zero_is_delta(p):
    assert convolution_power(p, 0) == point_mass(0)


@given(exact_pmfs(), st.integers(1, 4))
def test_convolution_power_matches_repeated_convolve(p, m):
    expected = p
    for _ in range(m - 1):
        expected = convolve(expected, p)
    assert convolution_power(p, m) == expected


def test_convolution_power_binomial():
    p = convolution_power(uniform_pmf(0, 1), 3)
    assert p.weights == (F(1, 8), F(3, 8), F(3, 8), F(1, 8))
    with pytest.raises(PreconditionViolation):
        convolution_power(p, -1)


def test_float_convolution_matches_exact():
    exact = convolution_power(uniform_pmf(-1, 2), 4)
    floating = convolution_power(uniform_pmf(-1, 2, PMFMode.FLOAT), 4)
    assert floating.offset == exact.offset
    np.testing.assert_allclose(floating.as_array(), exact.as_array(), atol=1e-15)


def test_reflect_and_moments():
    p = uniform_pmf(0, 1)
    assert reflect(p) == uniform_pmf(-1, 0)
    m = moments(p)
    assert (m.mean, m.variance, m.second_moment) == (F(1, 2), F(1, 4), F(1, 2))


def test_interval_mass_is_strict():
    lazy = LatticePMF.from_weights(-1, ["1/4", "1/2", "1/4"])
    assert interval_mass(lazy, 1) == F(1, 2)
    assert interval_mass(lazy, F(3, 2)) == 1
    assert interval_mass(lazy, 2) == 1
    with pytest.raises(PreconditionViolation):
        interval_mass(lazy, 0)


def test_concentration():
    p = uniform_pmf(0, 9)
    assert concentration(p, 2) == F(3, 10)
    assert concentration(p, 0) == F(1, 10)
    assert concentration(p, 100) == 1
    skewed = LatticePMF.from_weights(0, ["1/10", "1/10", "1/2", "3/10"])
    assert concentration(skewed, 1) == F(4, 5)
    assert concentration(to_floating(skewed), 1) == pytest.approx(0.8)


def test_prob_abs_greater_and_zero_mass():
    p = uniform_pmf(-2, 2)
    assert prob_abs_greater(p, 1) == F(2, 5)
    assert zero_mass(p) == F(1, 5)


def test_symmetric_unimodal():
    assert is_symmetric_unimodal(uniform_pmf(-3, 3)) == (True, True)
    assert is_symmetric_unimodal(uniform_pmf(0, 3)) == (False, True)
    bimodal = LatticePMF.from_weights(-1, ["2/5", "1/5", "2/5"])
    assert is_symmetric_unimodal(bimodal) == (True, False)


# ======================
# X の分布
# ======================


def test_single_term_is_lazy_walk():
    # G = 1, T ~ R[0,1] のとき ε·(-T) は {-1, 0, 1} 上の 1/4, 1/2, 1/4
    law = alternating_sum_law(uniform_pmf(0, 1), 1)
    assert law == LatticePMF.from_weights(-1, ["1/4", "1/2", "1/4"])


def test_law_of_X_is_symmetric_unimodal():
    result = law_of_X(uniform_pmf(0, 2), g_max=6)
    assert result.truncation_mass == F(1, 729)
    assert sum(result.law.weights) == 1
    assert is_symmetric_unimodal(result.law) == (True, True)


def test_law_of_X_degenerate_waiting_time():
    assert law_of_X(point_mass(0), g_max=5).law == point_mass(0)


def test_law_of_X_float_agrees_with_exact():
    tau = LatticePMF.from_weights(0, ["7/16", "7/16", "1/16", "1/16"])
    exact = law_of_X(tau, g_max=8).law
    floating = law_of_X(to_floating(tau), g_max=8).law
    np.testing.assert_allclose(floating.as_array(), exact.as_array(), atol=1e-12)


def test_law_of_X_rejects_negative_support():
    with pytest.raises(PreconditionViolation):
        law_of_X(uniform_pmf(-1, 1), g_max=3)


def test_sample_stays_on_support(rng):
    p = uniform_pmf(-3, 5)
    draws = p.sample(10_000, rng)
    assert draws.min() >= -3
    assert draws.max() <= 5
    assert abs(draws.mean() - 1.0) < 0.1


# ======================
# テキスト形式
# ======================


@pytest.mark.parametrize(
    "pmf",
    [
        uniform_pmf(-2, 3),
        LatticePMF.from_weights(4, ["1/3", "0", "2/3"]),
        uniform_pmf(0, 4, PMFMode.FLOAT),
    ],
)
def test_text_format_restores(pmf, tmp_path):
    assert loads_pmf(dumps_pmf(pmf)) == pmf
    path = tmp_path / "p.txt"
    save_pmf(pmf, path)
    assert load_pmf(path) == pmf


def test_text_format_rejects_bad_input():
    with pytest.raises(InvalidDistributionError):
        loads_pmf("")
    with pytest.raises(InvalidDistributionError):
        loads_pmf("offset=x mode=exact\n1/1\n")
    with pytest.raises(InvalidDistributionError):
        loads_pmf("offset=0 mode=exact\n1/2\n1/4\n")
    # 区切りのないヘッダや読めない重みも同じ例外
    with pytest.raises(InvalidDistributionError):
        loads_pmf("offset=0 exact\n1/1\n")
    with pytest.raises(InvalidDistributionError):
        loads_pmf("offset=0 mode=float\nabc\n")
