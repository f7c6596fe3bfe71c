"""Load, validate and save country profiles and scenarios (JSON documents).

Validation collects every problem in a document before raising, each tagged
with a dotted field path such as ``essential.beds`` or ``research[2].year``.
The document layout is described in ``docs/schema.md``.
"""

from __future__ import annotations

import copy
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .allocator import CATEGORY_NAMES, N_CATEGORIES, AllocationProblem
from .ensurance import PopulationModel, ensurance_quadrature
from .errors import (
    CoverageError,
    FileAccessError,
    LifeIndexError,
    ParseError,
    ResolutionError,
    ValidationError,
)
from .model_core import (
    RESOURCE_NAMES,
    SERIES_POLICIES,
    ModelCoefficients,
    ResearchEntry,
    ResearchSeries,
    ResourceBundle,
    SaturationCoefficients,
)
from .subordinate import UrbanRuralSplit

PROFILE_SCHEMA = "lifeindex/profile-1"
SCENARIO_SCHEMA = "lifeindex/scenario-1"
EXPECTED_UNITS = {
    "money": "USD_millions",
    "personal_money": "USD",
    "resource_density": "per_1000",
}
YEAR_FIELDS = (
    "population",
    "per_capita_gdp",
    "essential",
    "complementary",
    "insurance",
    "population_model",
    "urban_rural",
)


# --------------------------------------------------------------------------
# low-level helpers


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and an atomic rename."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    except OSError as exc:
        raise FileAccessError(path, f"cannot write: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise FileAccessError(path, f"cannot write: {exc.strerror or exc}") from exc


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileAccessError(path, "file not found") from None
    except OSError as exc:
        raise FileAccessError(path, f"cannot read: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.msg, exc.lineno, exc.colno) from None


class _Checker:
    """Accumulates ``(path, message)`` issues while pulling typed values out of a document."""

    def __init__(self):
        self.issues: list[tuple[str, str]] = []

    def fail(self, path: str, message: str) -> None:
        self.issues.append((path, message))

    def obj(self, doc: Any, key: str, path: str, *, required: bool = True) -> dict | None:
        if not isinstance(doc, dict) or key not in doc:
            if required:
                self.fail(path, "missing required object")
            return None
        value = doc[key]
        if not isinstance(value, dict):
            self.fail(path, "must be an object")
            return None
        return value

    def known_keys(self, doc: dict | None, allowed, path: str) -> None:
        if doc is None:
            return
        for key in sorted(set(doc) - set(allowed)):
            self.fail(f"{path}.{key}" if path else key, "unknown field")

    def number(
        self,
        doc: Any,
        key: str,
        path: str,
        *,
        required: bool = True,
        default: float | None = None,
        ge: float | None = None,
        gt: float | None = None,
        le: float | None = None,
        lt: float | None = None,
        integer: bool = False,
    ) -> float | None:
        if not isinstance(doc, dict) or key not in doc or doc[key] is None:
            if required:
                self.fail(path, "missing required number")
            return default
        value = doc[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"must be a number, got {type(value).__name__}")
            return default
        if not math.isfinite(value):
            self.fail(path, "must be finite")
            return default
        if integer and int(value) != value:
            self.fail(path, f"must be an integer, got {value!r}")
            return default
        for bound, ok, text in (
            (ge, lambda v, b: v >= b, ">="),
            (gt, lambda v, b: v > b, ">"),
            (le, lambda v, b: v <= b, "<="),
            (lt, lambda v, b: v < b, "<"),
        ):
            if bound is not None and not ok(value, bound):
                self.fail(path, f"must be {text} {bound}, got {value!r}")
                return default
        return int(value) if integer else float(value)

    def vector(self, doc: Any, key: str, path: str, length: int, *, required: bool = True,
               gt: float | None = None, ge: float | None = None) -> tuple | None:
        if not isinstance(doc, dict) or key not in doc or doc[key] is None:
            if required:
                self.fail(path, f"missing required list of {length} numbers")
            return None
        raw = doc[key]
        if not isinstance(raw, list) or len(raw) != length:
            self.fail(path, f"must be a list of {length} numbers")
            return None
        out = [self.number({"v": item}, "v", f"{path}[{i}]", gt=gt, ge=ge) for i, item in enumerate(raw)]
        return None if any(v is None for v in out) else tuple(out)

    def string(self, doc: Any, key: str, path: str, *, required: bool = True,
               default: str | None = None, choices=None) -> str | None:
        if not isinstance(doc, dict) or key not in doc:
            if required:
                self.fail(path, "missing required string")
            return default
        value = doc[key]
        if not isinstance(value, str):
            self.fail(path, "must be a string")
            return default
        if choices is not None and value not in choices:
            self.fail(path, f"must be one of {list(choices)}, got {value!r}")
            return default
        return value

    def build(self, path: str, factory: Callable, *args, **kwargs):
        """Construct a domain value, turning its own invariant errors into issues."""
        if any(a is None for a in args) or any(v is None for v in kwargs.values()):
            return None
        try:
            return factory(*args, **kwargs)
        except LifeIndexError as exc:
            self.fail(path, str(exc))
            return None

    def units(self, doc: dict) -> None:
        units = self.obj(doc, "units", "units", required=False)
        if units is None:
            return
        self.known_keys(units, EXPECTED_UNITS, "units")
        for key, expected in EXPECTED_UNITS.items():
            if key in units and units[key] != expected:
                self.fail(f"units.{key}", f"unsupported unit {units[key]!r}; expected {expected!r}")

    def schema(self, doc: dict, expected: str) -> None:
        if "schema" in doc and doc["schema"] != expected:
            self.fail("schema", f"expected {expected!r}, got {doc['schema']!r}")


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


# --------------------------------------------------------------------------
# country profiles


@dataclass(frozen=True)
class CountryProfile:
    """All per-country inputs for one year, plus optional per-year overrides.

    ``history`` maps a year to the document fields that differ from the base
    year; :meth:`for_year` returns the merged, validated profile.
    """

    name: str
    year: int
    population: float
    per_capita_gdp: float
    essential: ResourceBundle
    complementary: ResourceBundle
    insurance: tuple[float, float]
    population_model: PopulationModel
    research: ResearchSeries
    urban_rural: UrbanRuralSplit
    synthetic: bool = False
    notes: str = ""
    history: dict = field(default_factory=dict, compare=True, repr=False)
    _snapshots: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_insured(self) -> float:
        return self.insurance[0]

    @property
    def n_uninsured(self) -> float:
        return self.insurance[1]

    def years(self) -> list[int]:
        return sorted({self.year, *self.history})

    def for_year(self, year: int) -> "CountryProfile":
        if year == self.year:
            return self
        if year not in self._snapshots:
            raise CoverageError(
                year,
                f"profile {self.name!r} has no data for year {year} "
                f"(available: {', '.join(map(str, self.years()))})",
            )
        return self._snapshots[year]

    def to_document(self) -> dict:
        pm = self.population_model
        doc = {
            "schema": PROFILE_SCHEMA,
            "units": dict(EXPECTED_UNITS),
            "name": self.name,
            "year": self.year,
            "synthetic": self.synthetic,
            "population": self.population,
            "per_capita_gdp": self.per_capita_gdp,
            "essential": dict(zip(RESOURCE_NAMES, self.essential.as_tuple())),
            "complementary": dict(zip(RESOURCE_NAMES, self.complementary.as_tuple())),
            "insurance": {"n_insured": self.insurance[0], "n_uninsured": self.insurance[1]},
            "population_model": {
                "lambda_med": pm.lambda_med,
                "mu_inc": pm.mu_inc,
                "sigma_inc": pm.sigma_inc,
                "essential_expense": pm.essential_expense,
                "k_gov": pm.k_gov,
                "money_quantum": pm.money_quantum,
            },
            "research": [
                {"year": e.year, "staff": e.staff, "funding": e.funding} for e in self.research.entries
            ],
            "urban_rural": {
                "rural_beds": self.urban_rural.rural_beds,
                "urban_beds": self.urban_rural.urban_beds,
            },
        }
        if self.notes:
            doc["notes"] = self.notes
        if self.history:
            doc["history"] = [
                {"year": y, **copy.deepcopy(self.history[y])} for y in sorted(self.history)
            ]
        return doc


_PROFILE_KEYS = ("schema", "units", "name", "year", "synthetic", "notes", "research", "history",
                 *YEAR_FIELDS)


def _profile_year_fields(ck: _Checker, doc: dict, prefix: str) -> dict:
    """Validate the per-year fields of ``doc``; returns constructed values (None on failure)."""
    p = prefix
    out: dict[str, Any] = {}
    out["population"] = ck.number(doc, "population", f"{p}population", gt=0)
    out["per_capita_gdp"] = ck.number(doc, "per_capita_gdp", f"{p}per_capita_gdp", gt=0)

    for block in ("essential", "complementary"):
        raw = ck.obj(doc, block, f"{p}{block}")
        ck.known_keys(raw, RESOURCE_NAMES, f"{p}{block}")
        values = [ck.number(raw, r, f"{p}{block}.{r}", ge=0) for r in RESOURCE_NAMES] if raw else [None]
        out[block] = ck.build(f"{p}{block}", ResourceBundle, *values) if raw else None

    ins = ck.obj(doc, "insurance", f"{p}insurance")
    ck.known_keys(ins, ("n_insured", "n_uninsured"), f"{p}insurance")
    n_in = ck.number(ins, "n_insured", f"{p}insurance.n_insured", ge=0) if ins else None
    n_un = ck.number(ins, "n_uninsured", f"{p}insurance.n_uninsured", ge=0) if ins else None
    out["insurance"] = None
    if n_in is not None and n_un is not None:
        out["insurance"] = (n_in, n_un)
        if out["population"] is not None and n_in + n_un != out["population"]:
            ck.fail(
                f"{p}insurance",
                f"n_insured + n_uninsured = {n_in + n_un!r} must equal population {out['population']!r}",
            )

    pm = ck.obj(doc, "population_model", f"{p}population_model")
    pm_keys = ("lambda_med", "mu_inc", "sigma_inc", "essential_expense", "k_gov", "money_quantum")
    ck.known_keys(pm, pm_keys, f"{p}population_model")
    out["population_model"] = None
    if pm is not None:
        q = f"{p}population_model."
        kwargs = dict(
            lambda_med=ck.number(pm, "lambda_med", q + "lambda_med", gt=0),
            mu_inc=ck.number(pm, "mu_inc", q + "mu_inc"),
            sigma_inc=ck.number(pm, "sigma_inc", q + "sigma_inc", gt=0),
            essential_expense=ck.number(pm, "essential_expense", q + "essential_expense", ge=0),
            k_gov=ck.number(pm, "k_gov", q + "k_gov", ge=0, le=1),
            money_quantum=ck.number(pm, "money_quantum", q + "money_quantum", required=False,
                                    default=1.0, gt=0),
        )
        if out["insurance"] is not None:
            out["population_model"] = ck.build(
                f"{p}population_model", PopulationModel,
                n_insured=out["insurance"][0], n_uninsured=out["insurance"][1], **kwargs,
            )

    ur = ck.obj(doc, "urban_rural", f"{p}urban_rural")
    ck.known_keys(ur, ("rural_beds", "urban_beds"), f"{p}urban_rural")
    out["urban_rural"] = None
    if ur is not None:
        out["urban_rural"] = ck.build(
            f"{p}urban_rural", UrbanRuralSplit,
            ck.number(ur, "rural_beds", f"{p}urban_rural.rural_beds", ge=0),
            ck.number(ur, "urban_beds", f"{p}urban_rural.urban_beds", gt=0),
        )
    return out


def _research_series(ck: _Checker, doc: dict) -> ResearchSeries | None:
    raw = doc.get("research") if isinstance(doc, dict) else None
    if raw is None:
        ck.fail("research", "missing required list")
        return None
    if not isinstance(raw, list):
        ck.fail("research", "must be a list")
        return None
    entries = []
    prev = None
    ok = True
    for i, item in enumerate(raw):
        path = f"research[{i}]"
        if not isinstance(item, dict):
            ck.fail(path, "must be an object")
            ok = False
            continue
        ck.known_keys(item, ("year", "staff", "funding"), path)
        year = ck.number(item, "year", f"{path}.year", integer=True)
        staff = ck.number(item, "staff", f"{path}.staff", ge=0)
        funding = ck.number(item, "funding", f"{path}.funding", ge=0)
        if None in (year, staff, funding):
            ok = False
            continue
        if prev is not None and year <= prev:
            ck.fail(f"{path}.year", f"years must be strictly increasing ({year} after {prev})")
            ok = False
        prev = year
        entries.append(ResearchEntry(year, staff, funding))
    return ck.build("research", ResearchSeries, tuple(entries)) if ok else None


def profile_from_document(doc: Any, source=None) -> CountryProfile:
    ck = _Checker()
    if not isinstance(doc, dict):
        raise ValidationError([("", "profile document must be a JSON object")], source)
    ck.schema(doc, PROFILE_SCHEMA)
    ck.units(doc)
    ck.known_keys(doc, _PROFILE_KEYS, "")
    name = ck.string(doc, "name", "name")
    year = ck.number(doc, "year", "year", integer=True)
    synthetic = doc.get("synthetic", False)
    if not isinstance(synthetic, bool):
        ck.fail("synthetic", "must be true or false")
    notes = ck.string(doc, "notes", "notes", required=False, default="")
    fields = _profile_year_fields(ck, doc, "")
    research = _research_series(ck, doc)

    history: dict[int, dict] = {}
    snapshots: dict[int, CountryProfile] = {}
    raw_history = doc.get("history", [])
    if not isinstance(raw_history, list):
        ck.fail("history", "must be a list")
        raw_history = []
    base_fields = {k: doc[k] for k in YEAR_FIELDS if k in doc}
    for i, item in enumerate(raw_history):
        path = f"history[{i}]"
        if not isinstance(item, dict):
            ck.fail(path, "must be an object")
            continue
        ck.known_keys(item, ("year", *YEAR_FIELDS), path)
        h_year = ck.number(item, "year", f"{path}.year", integer=True)
        if h_year is None:
            continue
        if h_year == year or h_year in history:
            ck.fail(f"{path}.year", f"duplicate year {h_year}")
            continue
        override = {k: v for k, v in item.items() if k != "year"}
        history[h_year] = override
        merged = _deep_merge(base_fields, override)
        h_fields = _profile_year_fields(ck, merged, f"{path}.")
        if all(v is not None for v in h_fields.values()) and research is not None:
            snapshots[h_year] = CountryProfile(
                name=name or "", year=h_year, research=research,
                synthetic=bool(synthetic), notes=notes or "", **h_fields,
            )

    if ck.issues:
        raise ValidationError(ck.issues, source)
    return CountryProfile(
        name=name, year=year, research=research, synthetic=bool(synthetic), notes=notes,
        history=history, _snapshots=snapshots, **fields,
    )


def load_profile(path) -> CountryProfile:
    path = Path(path)
    return profile_from_document(read_json(path), source=path)


def save_profile(profile: CountryProfile, path) -> None:
    atomic_write_text(path, canonical_json(profile.to_document()))


# --------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class AllocationSpec:
    """Allocation parameters as written in a scenario (``e_indicator`` may be ``None``: derive it)."""

    f_total: float
    f_med: float
    f_income: float
    s_salary: float
    n_unit_essential: tuple[float, float, float]
    n_unit_complementary: tuple[float, float, float]
    e_indicator: float | None = None
    p_uninsure: float | None = None
    baseline: tuple[float, ...] = (0.0,) * N_CATEGORIES
    aid_cap_fraction: float = 0.95
    step: float | None = None


@dataclass(frozen=True)
class Scenario:
    profile_ref: str
    profile: CountryProfile
    coefficients: ModelCoefficients
    saturation: SaturationCoefficients
    allocation: AllocationSpec | None = None
    metadata: dict = field(default_factory=dict)
    path: Path | None = None

    def allocation_problem(self, budget: float | None = None) -> AllocationProblem:
        """The allocation instance of this scenario; ``budget`` overrides ``f_total``."""
        spec = self.allocation
        if spec is None:
            raise ValidationError([("allocation", "scenario has no allocation block")], self.path)
        p_uninsure = spec.p_uninsure
        if p_uninsure is None:
            p_uninsure = 1.0 - self.profile.population_model.p_insure
        e_indicator = spec.e_indicator
        if e_indicator is None:
            e_indicator = ensurance_quadrature(self.profile.population_model).indicator_rate
        return AllocationProblem(
            f_total=spec.f_total if budget is None else budget,
            f_med=spec.f_med,
            f_income=spec.f_income,
            p_uninsure=p_uninsure,
            e_indicator=e_indicator,
            s_salary=spec.s_salary,
            n_unit_essential=spec.n_unit_essential,
            n_unit_complementary=spec.n_unit_complementary,
            coeffs=self.coefficients,
            sat=self.saturation,
            baseline=spec.baseline,
            aid_cap_fraction=spec.aid_cap_fraction,
        )


_COEFF_KEYS = ("k_q", "k_N", "k_M", "E_0", "k_lt", "tau", "series_policy")
_ALLOC_KEYS = ("f_total", "f_med", "f_income", "s_salary", "n_unit_essential", "n_unit_complementary",
               "e_indicator", "p_uninsure", "baseline_spending", "aid_cap_fraction", "step")


def _coefficients(ck: _Checker, doc: dict) -> ModelCoefficients | None:
    raw = ck.obj(doc, "coefficients", "coefficients")
    if raw is None:
        return None
    ck.known_keys(raw, _COEFF_KEYS, "coefficients")
    d = ModelCoefficients()
    kwargs = dict(
        k_q=ck.number(raw, "k_q", "coefficients.k_q", required=False, default=d.k_q, gt=0),
        k_N=ck.number(raw, "k_N", "coefficients.k_N", gt=0),
        k_M=ck.number(raw, "k_M", "coefficients.k_M", gt=0),
        E_0=ck.number(raw, "E_0", "coefficients.E_0", required=False, default=d.E_0, gt=0),
        k_lt=ck.number(raw, "k_lt", "coefficients.k_lt", required=False, default=d.k_lt, ge=0),
        tau=ck.number(raw, "tau", "coefficients.tau", required=False, default=d.tau, ge=0,
                      integer=True),
        series_policy=ck.string(raw, "series_policy", "coefficients.series_policy", required=False,
                                default=d.series_policy, choices=SERIES_POLICIES),
    )
    return ck.build("coefficients", ModelCoefficients, **kwargs)


def _saturation(ck: _Checker, doc: dict, profile: CountryProfile | None) -> SaturationCoefficients | None:
    raw = ck.obj(doc, "saturation", "saturation", required=False) or {}
    ck.known_keys(raw, ("k_essential", "k_complementary"), "saturation")
    k_e = ck.vector(raw, "k_essential", "saturation.k_essential", 3, required=False, gt=0)
    k_c = ck.vector(raw, "k_complementary", "saturation.k_complementary", 3, required=False, gt=0)
    if k_c is not None:
        if k_e is None:
            if profile is None:
                return None
            k_e = profile.essential.as_tuple()
        return ck.build("saturation", SaturationCoefficients, k_e, k_c)
    if profile is None:
        return None
    kwargs = {} if k_e is None else {"k_essential": k_e}
    return ck.build(
        "saturation", SaturationCoefficients.calibrated,
        profile.essential, profile.complementary, **kwargs,
    )


def _baseline(ck: _Checker, raw: dict) -> tuple[float, ...] | None:
    value = raw.get("baseline_spending")
    if value is None:
        return (0.0,) * N_CATEGORIES
    if isinstance(value, dict):
        ck.known_keys(value, CATEGORY_NAMES, "allocation.baseline_spending")
        out = [ck.number(value, name, f"allocation.baseline_spending.{name}", required=False,
                         default=0.0, ge=0) for name in CATEGORY_NAMES]
        return tuple(out)
    return ck.vector(raw, "baseline_spending", "allocation.baseline_spending", N_CATEGORIES, ge=0)


def _allocation(ck: _Checker, doc: dict) -> AllocationSpec | None:
    raw = ck.obj(doc, "allocation", "allocation", required=False)
    if raw is None:
        return None
    ck.known_keys(raw, _ALLOC_KEYS, "allocation")
    a = "allocation."
    e_ind = raw.get("e_indicator")
    if e_ind == "quadrature":
        e_indicator = None
    else:
        e_indicator = ck.number(raw, "e_indicator", a + "e_indicator", required=False, ge=0, le=1)
    kwargs = dict(
        f_total=ck.number(raw, "f_total", a + "f_total", gt=0),
        f_med=ck.number(raw, "f_med", a + "f_med", gt=0),
        f_income=ck.number(raw, "f_income", a + "f_income", ge=0),
        s_salary=ck.number(raw, "s_salary", a + "s_salary", gt=0),
        n_unit_essential=ck.vector(raw, "n_unit_essential", a + "n_unit_essential", 3, gt=0),
        n_unit_complementary=ck.vector(raw, "n_unit_complementary", a + "n_unit_complementary", 3, gt=0),
        baseline=_baseline(ck, raw),
        aid_cap_fraction=ck.number(raw, "aid_cap_fraction", a + "aid_cap_fraction", required=False,
                                   default=0.95, gt=0, lt=1),
    )
    p_un = ck.number(raw, "p_uninsure", a + "p_uninsure", required=False, ge=0, le=1)
    step = ck.number(raw, "step", a + "step", required=False, gt=0)
    if any(v is None for v in kwargs.values()):
        return None
    return AllocationSpec(e_indicator=e_indicator, p_uninsure=p_un, step=step, **kwargs)


def _metadata(ck: _Checker, doc: dict) -> dict:
    raw = ck.obj(doc, "metadata", "metadata", required=False) or {}
    out = {}
    for key, value in raw.items():
        if not isinstance(value, str):
            ck.fail(f"metadata.{key}", "metadata values must be strings")
        else:
            out[str(key)] = value
    return out


def scenario_from_document(doc: Any, base_dir=None, source=None) -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError([("", "scenario document must be a JSON object")], source)
    ck = _Checker()
    ck.schema(doc, SCENARIO_SCHEMA)
    ck.units(doc)
    ck.known_keys(doc, ("schema", "units", "profile_ref", "coefficients", "saturation", "allocation",
                        "metadata"), "")
    ref = ck.string(doc, "profile_ref", "profile_ref")
    profile = None
    if ref is not None:
        ref_path = Path(ref)
        if not ref_path.is_absolute():
            ref_path = Path(base_dir or ".") / ref_path
        if not ref_path.exists():
            raise ResolutionError(ref_path, f"profile_ref {ref!r} not found: {ref_path}")
        profile = load_profile(ref_path)
    coefficients = _coefficients(ck, doc)
    saturation = _saturation(ck, doc, profile)
    allocation = _allocation(ck, doc)
    metadata = _metadata(ck, doc)
    if ck.issues:
        raise ValidationError(ck.issues, source)
    return Scenario(
        profile_ref=ref, profile=profile, coefficients=coefficients, saturation=saturation,
        allocation=allocation, metadata=metadata, path=Path(source) if source is not None else None,
    )


def load_scenario(path) -> Scenario:
    """Load a scenario and the profile it references (relative to the scenario's directory)."""
    path = Path(path)
    return scenario_from_document(read_json(path), base_dir=path.parent, source=path)
