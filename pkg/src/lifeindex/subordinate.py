"""Subordinate metrics: matching degree, fairness degree and luxury index."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError, SingularityError


class MatchingRegimeWarning(UserWarning):
    """Matching degree computed with L_index >= per-capita GDP (non-positive denominator)."""


@dataclass(frozen=True)
class EconomicContext:
    per_capita_gdp: float
    life_index: float

    def __post_init__(self):
        for name in ("per_capita_gdp", "life_index"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class UrbanRuralSplit:
    """Comparable resource densities (hospital beds per 1000 residents by default)."""

    rural_beds: float
    urban_beds: float

    def __post_init__(self):
        rural, urban = float(self.rural_beds), float(self.urban_beds)
        if not (math.isfinite(rural) and rural >= 0):
            raise DomainError(f"rural_beds must be finite and >= 0, got {rural!r}")
        if not (math.isfinite(urban) and urban > 0):
            raise DomainError(f"urban_beds must be finite and > 0, got {urban!r}")
        object.__setattr__(self, "rural_beds", rural)
        object.__setattr__(self, "urban_beds", urban)


@dataclass(frozen=True)
class LuxuryComponents:
    r_essential: float
    r_complementary: float
    p_ei: float
    p_hc: float

    def __post_init__(self):
        bounds = {
            "r_essential": (0.0, 1.0, False),
            "r_complementary": (0.0, 1.0, False),
            "p_ei": (0.0, 1.0, True),
            "p_hc": (0.0, 1.0, False),
        }
        for name, (lo, hi, closed) in bounds.items():
            value = float(getattr(self, name))
            ok = lo <= value <= hi if closed else lo <= value < hi
            if not ok:
                raise DomainError(f"{name} out of range: {value!r}")
            object.__setattr__(self, name, value)

    @property
    def unnecessity_degree(self) -> float:
        return self.r_complementary + self.p_hc

    @property
    def necessity_degree(self) -> float:
        return self.r_essential + self.p_ei


def matching_degree(ctx: EconomicContext) -> float:
    """``10 / (ln gdp - ln L_index)``.

    A non-positive denominator (L_index above GDP in the chosen units) is
    returned as computed and flagged with :class:`MatchingRegimeWarning`.
    """
    denom = math.log(ctx.per_capita_gdp) - math.log(ctx.life_index)
    if denom == 0.0:
        raise SingularityError("matching degree is singular when per-capita GDP equals L_index")
    value = 10.0 / denom
    if denom < 0.0:
        warnings.warn(
            f"matching degree {value:.6g} is negative: L_index {ctx.life_index:.6g} "
            f"exceeds per-capita GDP {ctx.per_capita_gdp:.6g}",
            MatchingRegimeWarning,
            stacklevel=2,
        )
    return value


def fairness_degree(split: UrbanRuralSplit) -> float:
    if split.urban_beds == 0:
        raise DomainError("urban density must be > 0")
    return split.rural_beds / split.urban_beds


def luxury_index(c: LuxuryComponents) -> float:
    d_un = c.unnecessity_degree
    d_total = c.necessity_degree + d_un
    if d_total == 0.0:
        raise DomainError("luxury index undefined when both degrees are zero")
    return d_un / d_total
