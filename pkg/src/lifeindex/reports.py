"""Metric reports: every major and subordinate metric for one profile year."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

from .ensurance import perfect_ensurance_mc, perfect_ensurance_quadrature
from .errors import SeriesLookupError
from .model_core import (
    complementary_product,
    essential_product,
    life_expectancy,
    life_index,
    potential_of_health_care,
    power_of_tech,
    quality_of_life,
)
from .profiles_io import Scenario
from .subordinate import (
    EconomicContext,
    LuxuryComponents,
    MatchingRegimeWarning,
    fairness_degree,
    luxury_index,
    matching_degree,
)

DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 0

REPORT_FIELDS = (
    "country",
    "year",
    "l_index",
    "q_life",
    "e_life",
    "p_mr",
    "p_ei",
    "p_tech",
    "p_hc",
    "matching_degree",
    "fairness_degree",
    "luxury_index",
    "warnings",
)


@dataclass(frozen=True)
class MetricReport:
    country: str
    year: int
    l_index: float
    q_life: float
    e_life: float
    p_mr: float
    p_ei: float
    p_tech: float
    p_hc: float
    matching_degree: float
    fairness_degree: float
    luxury_index: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["warnings"] = list(self.warnings)
        return out

    def consistency_residuals(self, k_q: float) -> tuple[float, float]:
        """Absolute residuals of ``l = q * e`` and ``q = (p_mr + p_ei + p_tech) / k_q``."""
        return (
            abs(self.l_index - self.q_life * self.e_life),
            abs(self.q_life - (self.p_mr + self.p_ei + self.p_tech) / k_q),
        )


def evaluate(
    scenario: Scenario,
    year: int | None = None,
    *,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    quadrature: bool = False,
    workers: int = 1,
) -> MetricReport:
    """Compute a :class:`MetricReport` for ``year`` (default: the profile's base year).

    P_ei comes from Monte Carlo unless ``quadrature`` is set. Non-fatal
    conditions (a negative matching degree) are collected into ``warnings``.
    """
    base = scenario.profile
    year = base.year if year is None else int(year)
    prof = base.for_year(year)
    coeffs = scenario.coefficients
    sat = scenario.saturation

    r_e = essential_product(prof.essential, sat)
    r_c = complementary_product(prof.complementary, sat)
    p_mr = r_e + r_c
    entry = prof.research.lookup(year, coeffs.series_policy)
    p_hc = potential_of_health_care(entry.staff, entry.funding, coeffs)
    p_tech = power_of_tech(prof.research, year, coeffs)
    if quadrature:
        p_ei = perfect_ensurance_quadrature(prof.population_model)
    else:
        p_ei = perfect_ensurance_mc(prof.population_model, samples, seed, workers=workers).p_ei

    e_life = life_expectancy(p_hc, coeffs)
    q_life = quality_of_life(p_mr, p_ei, p_tech, coeffs)
    l_index = life_index(q_life, e_life)

    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MatchingRegimeWarning)
        md = matching_degree(EconomicContext(prof.per_capita_gdp, l_index))
    notes.extend(str(w.message) for w in caught if issubclass(w.category, MatchingRegimeWarning))
    fd = fairness_degree(prof.urban_rural)
    lux = luxury_index(LuxuryComponents(r_e, r_c, p_ei, p_hc))
    for name, value in (("matching_degree", md), ("fairness_degree", fd), ("luxury_index", lux)):
        if not math.isfinite(value):
            notes.append(f"{name} is not finite")

    return MetricReport(
        country=prof.name,
        year=year,
        l_index=l_index,
        q_life=q_life,
        e_life=e_life,
        p_mr=p_mr,
        p_ei=p_ei,
        p_tech=p_tech,
        p_hc=p_hc,
        matching_degree=md,
        fairness_degree=fd,
        luxury_index=lux,
        warnings=tuple(notes),
    )


def earliest_computable_year(scenario: Scenario) -> int | None:
    """First profile year whose research lookups (t and t - tau) both succeed, or None."""
    coeffs = scenario.coefficients
    series = scenario.profile.research
    for year in scenario.profile.years():
        try:
            series.lookup(year, coeffs.series_policy)
            series.lookup(year - coeffs.tau, coeffs.series_policy)
        except SeriesLookupError:
            continue
        return year
    return None
