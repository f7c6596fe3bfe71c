"""Deterministic metric stack: saturation terms, P_mr, P_hc, P_tech, E_life, Q_life, L_index.

Every function here is pure. Resource densities are per 1000 population and
money is in the configured aggregate unit (millions of USD by default).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DomainError, SeriesLookupError

RESOURCE_NAMES = ("doctors", "nurses", "beds")

SERIES_STRICT = "strict"
SERIES_NEAREST_PRIOR = "nearest_prior"
SERIES_POLICIES = (SERIES_STRICT, SERIES_NEAREST_PRIOR)


def _finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ResourceBundle:
    """Doctor, nurse and bed densities (per 1000 population)."""

    doctors: float
    nurses: float
    beds: float

    def __post_init__(self):
        for name in RESOURCE_NAMES:
            value = _finite(getattr(self, name), name)
            if value < 0:
                raise DomainError(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.doctors, self.nurses, self.beds)

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "ResourceBundle":
        if len(values) != 3:
            raise DomainError(f"expected 3 resource values, got {len(values)}")
        return cls(*values)


@dataclass(frozen=True)
class SaturationCoefficients:
    """Half-saturation constants for the essential and complementary resource shares."""

    k_essential: tuple[float, float, float]
    k_complementary: tuple[float, float, float]

    def __post_init__(self):
        for name in ("k_essential", "k_complementary"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != 3:
                raise DomainError(f"{name} must have 3 entries, got {len(values)}")
            for v in values:
                if not math.isfinite(v) or v <= 0:
                    raise DomainError(f"{name} entries must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, values)

    @classmethod
    def calibrated(
        cls,
        baseline_essential: ResourceBundle,
        baseline_complementary: ResourceBundle,
        k_essential: Sequence[float] | None = None,
    ) -> "SaturationCoefficients":
        """Derive ``k_complementary`` from ``R_e,i * k_e,i = R_c,i * k_c,i`` at a baseline.

        ``k_essential`` defaults to the baseline essential densities, which puts
        the baseline essential shares at exactly one half.
        """
        r_e = baseline_essential.as_tuple()
        r_c = baseline_complementary.as_tuple()
        k_e = tuple(float(v) for v in (k_essential if k_essential is not None else r_e))
        if len(k_e) != 3:
            raise DomainError(f"k_essential must have 3 entries, got {len(k_e)}")
        problems = []
        for name, re_i, ke_i, rc_i in zip(RESOURCE_NAMES, r_e, k_e, r_c):
            if rc_i == 0:
                problems.append(f"baseline complementary {name} is 0")
            if re_i == 0:
                problems.append(f"baseline essential {name} is 0")
        if problems:
            raise DomainError(
                "cannot calibrate k_complementary ("
                + ", ".join(problems)
                + "); supply k_complementary explicitly"
            )
        k_c = tuple(re_i * ke_i / rc_i for re_i, ke_i, rc_i in zip(r_e, k_e, r_c))
        return cls(k_essential=k_e, k_complementary=k_c)


@dataclass(frozen=True)
class ResearchEntry:
    year: int
    staff: float
    funding: float


@dataclass(frozen=True)
class ResearchSeries:
    """Yearly medical research staff counts and funding, strictly increasing in year."""

    entries: tuple[ResearchEntry, ...]
    _years: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = tuple(
            e if isinstance(e, ResearchEntry) else ResearchEntry(*e) for e in self.entries
        )
        cleaned = []
        for e in entries:
            if int(e.year) != e.year:
                raise DomainError(f"research year must be an integer, got {e.year!r}")
            staff = _finite(e.staff, f"staff[{e.year}]")
            funding = _finite(e.funding, f"funding[{e.year}]")
            if staff < 0 or funding < 0:
                raise DomainError(f"research staff and funding must be >= 0 (year {e.year})")
            cleaned.append(ResearchEntry(int(e.year), staff, funding))
        years = tuple(e.year for e in cleaned)
        if any(b <= a for a, b in zip(years, years[1:])):
            raise DomainError("research series years must be strictly increasing")
        object.__setattr__(self, "entries", tuple(cleaned))
        object.__setattr__(self, "_years", years)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> "ResearchSeries":
        return cls(tuple(ResearchEntry(int(y), s, m) for y, s, m in rows))

    @property
    def years(self) -> tuple[int, ...]:
        return self._years

    def lookup(self, year: int, policy: str = SERIES_STRICT) -> ResearchEntry:
        """Entry for ``year``; ``nearest_prior`` falls back to the latest earlier year."""
        if policy not in SERIES_POLICIES:
            raise DomainError(f"unknown series policy {policy!r}")
        i = bisect.bisect_right(self._years, year)
        if i and self._years[i - 1] == year:
            return self.entries[i - 1]
        if policy == SERIES_NEAREST_PRIOR and i:
            return self.entries[i - 1]
        raise SeriesLookupError(year)


@dataclass(frozen=True)
class ModelCoefficients:
    """Calibration constants of the life-index model.

    ``E_0`` and ``k_lt`` defaults are demonstration values only; ``k_q = 4``
    maps the three-term quality numerator (range [0, 4)) into [0, 1).
    """

    k_q: float = 4.0
    k_N: float = 100_000.0
    k_M: float = 30_000.0
    E_0: float = 70.0
    k_lt: float = 10.0
    tau: int = 25
    series_policy: str = SERIES_STRICT

    def __post_init__(self):
        for name in ("k_q", "k_N", "k_M", "E_0", "k_lt"):
            object.__setattr__(self, name, _finite(getattr(self, name), name))
        for name in ("k_q", "k_N", "k_M", "E_0"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be > 0")
        if self.k_lt < 0:
            raise DomainError("k_lt must be >= 0")
        if int(self.tau) != self.tau or self.tau < 0:
            raise DomainError(f"tau must be a nonnegative integer, got {self.tau!r}")
        object.__setattr__(self, "tau", int(self.tau))
        if self.series_policy not in SERIES_POLICIES:
            raise DomainError(f"series_policy must be one of {SERIES_POLICIES}")


def saturating_share(x: float, k: float) -> float:
    """Return ``x / (x + k)``, the diminishing-returns share in [0, 1)."""
    if not (math.isfinite(x) and math.isfinite(k)):
        raise DomainError(f"saturating_share needs finite inputs, got x={x!r}, k={k!r}")
    if x < 0:
        raise DomainError(f"saturating_share needs x >= 0, got {x!r}")
    if k <= 0:
        raise DomainError(f"saturating_share needs k > 0, got {k!r}")
    return x / (x + k)


def essential_product(essential: ResourceBundle, coeffs: SaturationCoefficients) -> float:
    out = 1.0
    for r, k in zip(essential.as_tuple(), coeffs.k_essential):
        out *= saturating_share(r, k)
    return out


def complementary_product(complementary: ResourceBundle, coeffs: SaturationCoefficients) -> float:
    out = 1.0
    for r, k in zip(complementary.as_tuple(), coeffs.k_complementary):
        out *= saturating_share(r, k)
    return out


def practical_effect(
    essential: ResourceBundle,
    complementary: ResourceBundle,
    coeffs: SaturationCoefficients,
) -> float:
    """P_mr: essential triple product plus complementary triple product, in [0, 2)."""
    return essential_product(essential, coeffs) + complementary_product(complementary, coeffs)


def potential_of_health_care(staff: float, funding: float, coeffs: ModelCoefficients) -> float:
    """P_hc from research staff and research funding."""
    return saturating_share(staff, coeffs.k_N) * saturating_share(funding, coeffs.k_M)


def power_of_tech(series: ResearchSeries, year: int, coeffs: ModelCoefficients) -> float:
    """P_tech(t) = P_hc(t - tau), read from the research series."""
    target = year - coeffs.tau
    try:
        entry = series.lookup(target, coeffs.series_policy)
    except SeriesLookupError:
        raise SeriesLookupError(
            target,
            f"research series has no entry for year {target} "
            f"(needed for P_tech({year}) with tau={coeffs.tau})",
        ) from None
    return potential_of_health_care(entry.staff, entry.funding, coeffs)


def life_expectancy(p_hc: float, coeffs: ModelCoefficients) -> float:
    if not (0.0 <= p_hc < 1.0):
        raise DomainError(f"p_hc must lie in [0, 1), got {p_hc!r}")
    return coeffs.E_0 + coeffs.k_lt * p_hc


def quality_of_life(p_mr: float, p_ei: float, p_tech: float, coeffs: ModelCoefficients) -> float:
    if not (0.0 <= p_mr < 2.0):
        raise DomainError(f"p_mr must lie in [0, 2), got {p_mr!r}")
    if not (0.0 <= p_ei <= 1.0):
        raise DomainError(f"p_ei must lie in [0, 1], got {p_ei!r}")
    if not (0.0 <= p_tech < 1.0):
        raise DomainError(f"p_tech must lie in [0, 1), got {p_tech!r}")
    return (p_mr + p_ei + p_tech) / coeffs.k_q


def life_index(q_life: float, e_life: float) -> float:
    """L_index = Q_life * E_life (deliberately not standardized)."""
    if not (math.isfinite(q_life) and q_life >= 0):
        raise DomainError(f"q_life must be finite and >= 0, got {q_life!r}")
    if not (math.isfinite(e_life) and e_life > 0):
        raise DomainError(f"e_life must be finite and > 0, got {e_life!r}")
    return q_life * e_life
