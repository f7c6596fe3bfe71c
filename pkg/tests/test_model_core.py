import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifeindex.errors import DomainError, SeriesLookupError
from lifeindex.model_core import (
    ModelCoefficients,
    ResearchSeries,
    ResourceBundle,
    SaturationCoefficients,
    essential_product,
    life_expectancy,
    life_index,
    potential_of_health_care,
    power_of_tech,
    practical_effect,
    quality_of_life,
    saturating_share,
)

density = st.floats(min_value=0.0, max_value=1e4, allow_nan=False)
half_sat = st.floats(min_value=1e-6, max_value=1e4, allow_nan=False)


def test_saturating_share_values():
    assert saturating_share(0.0, 2.0) == 0.0
    assert saturating_share(2.0, 2.0) == 0.5
    assert saturating_share(3.0, 1.0) == 0.75


@pytest.mark.parametrize("x, k", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0), (math.nan, 1.0), (1.0, math.inf)])
def test_saturating_share_rejects_bad_input(x, k):
    with pytest.raises(DomainError):
        saturating_share(x, k)


@given(density, half_sat)
def test_saturating_share_in_unit_interval(x, k):
    s = saturating_share(x, k)
    assert 0.0 <= s < 1.0 or (s == 1.0 and x / k > 1e15)


@given(density, density, half_sat)
def test_saturating_share_monotone(a, b, k):
    lo, hi = sorted((a, b))
    assert saturating_share(lo, k) <= saturating_share(hi, k)


def test_calibrated_coefficients_match_worked_example():
    ess = ResourceBundle(2.4, 3.1, 3.0)
    comp = ResourceBundle(0.6, 0.8, 0.7)
    sat = SaturationCoefficients.calibrated(ess, comp)
    assert sat.k_essential == (2.4, 3.1, 3.0)
    # 3.1 * 3.1 / 0.8 = 12.0125
    assert sat.k_complementary == pytest.approx((9.6, 12.0125, 9.0 / 0.7), rel=1e-12)
    for r_e, k_e, r_c, k_c in zip(ess.as_tuple(), sat.k_essential, comp.as_tuple(), sat.k_complementary):
        assert r_e * k_e == pytest.approx(r_c * k_c, rel=1e-9)
    assert essential_product(ess, sat) == 0.125
    assert practical_effect(ess, comp, sat) == pytest.approx(0.125184, abs=1e-5)


def test_calibration_rejects_zero_baseline():
    with pytest.raises(DomainError, match="complementary nurses"):
        SaturationCoefficients.calibrated(ResourceBundle(1, 1, 1), ResourceBundle(1, 0, 1))


def test_zero_essential_doctors_zeroes_essential_term():
    sat = SaturationCoefficients((1.0, 1.0, 1.0), (1.0, 1.0, 1.0))
    comp = ResourceBundle(1.0, 1.0, 1.0)
    assert practical_effect(ResourceBundle(0.0, 5.0, 5.0), comp, sat) == 0.125


def test_resource_bundle_rejects_negative():
    with pytest.raises(DomainError, match="beds"):
        ResourceBundle(1.0, 1.0, -0.1)


def test_potential_of_health_care():
    coeffs = ModelCoefficients(k_N=100.0, k_M=50.0)
    assert potential_of_health_care(100.0, 50.0, coeffs) == 0.25
    assert potential_of_health_care(0.0, 50.0, coeffs) == 0.0


def _series(years, staff=lambda y: 1000.0 + 10 * y, funding=lambda y: 30.0 + y):
    return ResearchSeries.from_rows((y, staff(y), funding(y)) for y in years)


def test_power_of_tech_is_delayed_potential():
    coeffs = ModelCoefficients(k_N=2000.0, k_M=60.0)
    series = _series(range(1970, 2000))
    for year in range(1995, 2000):
        e = series.lookup(year - 25)
        assert power_of_tech(series, year, coeffs) == potential_of_health_care(e.staff, e.funding, coeffs)


def test_power_of_tech_names_missing_year():
    series = _series(range(1990, 2000))
    with pytest.raises(SeriesLookupError, match="1974") as info:
        power_of_tech(series, 1999, ModelCoefficients())
    assert info.value.year == 1974


def test_nearest_prior_policy_falls_back():
    series = _series([1970, 1980])
    strict = ModelCoefficients()
    lenient = ModelCoefficients(series_policy="nearest_prior")
    with pytest.raises(SeriesLookupError):
        power_of_tech(series, 2000, strict)
    e = series.lookup(1970)
    assert power_of_tech(series, 2000, lenient) == potential_of_health_care(e.staff, e.funding, lenient)


def test_series_must_increase():
    with pytest.raises(DomainError):
        _series([2000, 1999])


def test_quality_life_and_index():
    coeffs = ModelCoefficients(E_0=70.0, k_lt=10.0)
    e = life_expectancy(0.5, coeffs)
    q = quality_of_life(1.0, 1.0, 0.5, coeffs)
    assert e == 75.0
    assert q == 0.625
    assert life_index(q, e) == 46.875


@pytest.mark.parametrize("p_mr, p_ei, p_tech", [(2.0, 0.5, 0.5), (0.5, 1.1, 0.5), (0.5, 0.5, 1.0), (-0.1, 0, 0)])
def test_quality_rejects_out_of_range(p_mr, p_ei, p_tech):
    with pytest.raises(DomainError):
        quality_of_life(p_mr, p_ei, p_tech, ModelCoefficients())


@settings(max_examples=300)
@given(
    st.tuples(density, density, density),
    st.tuples(density, density, density),
    st.tuples(half_sat, half_sat, half_sat),
    st.tuples(half_sat, half_sat, half_sat),
    st.integers(0, 5),
    st.floats(0.0, 100.0),
)
def test_practical_effect_bounded_and_monotone(ess, comp, k_e, k_c, axis, bump):
    sat = SaturationCoefficients(k_e, k_c)
    base = practical_effect(ResourceBundle(*ess), ResourceBundle(*comp), sat)
    assert 0.0 <= base <= 2.0
    values = list(ess + comp)
    values[axis] += bump
    bumped = practical_effect(ResourceBundle(*values[:3]), ResourceBundle(*values[3:]), sat)
    assert bumped >= base


def test_model_coefficients_validate():
    with pytest.raises(DomainError):
        ModelCoefficients(k_q=0)
    with pytest.raises(DomainError):
        ModelCoefficients(tau=2.5)
    with pytest.raises(DomainError):
        ModelCoefficients(series_policy="closest")
