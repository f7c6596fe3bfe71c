"""Perfect ensurance index: insured share, Monte Carlo shortage ratio, quadrature, closed form.

The shortage ratio is taken over the uninsured subpopulation: medical
expenditure ``X_med ~ quantum * Poisson(lambda / quantum)`` and net income
``X_inc ~ Normal(mu, sigma)``. A person's out-of-pocket burden is
``X_med * (1 - k_gov)``; they are in the shortage set when the burden exceeds
their disposable income ``max(X_inc - E_e, 0)``, and the unmet part of the
burden is the shortage. Capping at the burden keeps the ratio in [0, 1].

Random streams: samples are drawn in fixed-size blocks, and block ``b`` uses
``PCG64(SeedSequence(seed, spawn_key=(b,)))``. Block sums are merged in block
order, so any number of workers reproduces the serial result bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from . import kernels
from .errors import DomainError, ResourceLimitError, SingularityError

DEFAULT_BLOCK_SIZE = 1 << 16
DEFAULT_TAIL_EPS = 1e-12
DEFAULT_INDEX_CAP = 10_000_000


@dataclass(frozen=True)
class PopulationModel:
    """Distribution parameters for per-person money amounts (currency base units)."""

    lambda_med: float
    mu_inc: float
    sigma_inc: float
    essential_expense: float
    k_gov: float
    n_insured: float
    n_uninsured: float
    money_quantum: float = 1.0

    def __post_init__(self):
        for name in ("lambda_med", "mu_inc", "sigma_inc", "essential_expense",
                     "k_gov", "n_insured", "n_uninsured", "money_quantum"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.lambda_med <= 0:
            raise DomainError("lambda_med must be > 0")
        if self.sigma_inc <= 0:
            raise DomainError("sigma_inc must be > 0")
        if self.essential_expense < 0:
            raise DomainError("essential_expense must be >= 0")
        if not 0.0 <= self.k_gov <= 1.0:
            raise DomainError("k_gov must lie in [0, 1]")
        if self.n_insured < 0 or self.n_uninsured < 0:
            raise DomainError("population counts must be >= 0")
        if self.n_insured + self.n_uninsured <= 0:
            raise DomainError("total population must be > 0")
        if self.money_quantum <= 0:
            raise DomainError("money_quantum must be > 0")

    @property
    def p_insure(self) -> float:
        return insured_proportion(self)


@dataclass(frozen=True)
class EnsuranceEstimate:
    p_ei: float
    p_insure: float
    shortage_ratio: float
    indicator_rate: float
    n_samples: int
    seed: int
    std_error: float


@dataclass(frozen=True)
class QuadratureResult:
    """Population expectations per uninsured person, plus the resulting index."""

    p_ei: float
    p_insure: float
    expected_shortage: float
    expected_burden: float
    indicator_rate: float
    n_terms: int

    @property
    def shortage_ratio(self) -> float:
        if self.expected_burden == 0.0:
            return 0.0
        return min(self.expected_shortage / self.expected_burden, 1.0)


def insured_proportion(model: PopulationModel) -> float:
    total = model.n_insured + model.n_uninsured
    if total <= 0:
        raise DomainError("total population must be > 0")
    return model.n_insured / total


def shortage_sample(x_med: float, x_inc: float, model: PopulationModel) -> tuple[int, float, float]:
    """Return ``(indicator, shortage, burden)`` for one uninsured person."""
    if not (math.isfinite(x_med) and x_med >= 0):
        raise DomainError(f"x_med must be finite and >= 0, got {x_med!r}")
    if not math.isfinite(x_inc):
        raise DomainError(f"x_inc must be finite, got {x_inc!r}")
    burden = x_med * (1.0 - model.k_gov)
    disposable = max(x_inc - model.essential_expense, 0.0)
    if burden > disposable:
        return 1, burden - disposable, burden
    return 0, 0.0, burden


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _block_sums(model: PopulationModel, seed: int, block: int, size: int):
    rng = _block_rng(seed, block)
    q = model.money_quantum
    x_med = rng.poisson(model.lambda_med / q, size).astype(np.float64) * q
    x_inc = rng.normal(model.mu_inc, model.sigma_inc, size)
    return kernels.shortage_block_sums(x_med, x_inc, 1.0 - model.k_gov, model.essential_expense)


def perfect_ensurance_mc(
    model: PopulationModel,
    n_samples: int,
    seed: int,
    *,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> EnsuranceEstimate:
    """Monte Carlo estimate of P_ei with a delta-method standard error."""
    if int(n_samples) != n_samples or n_samples < 1:
        raise DomainError(f"n_samples must be a positive integer, got {n_samples!r}")
    if not 0 <= seed < 2**64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    if block_size < 1:
        raise DomainError("block_size must be >= 1")
    n_samples = int(n_samples)
    n_blocks = -(-n_samples // block_size)
    sizes = [block_size] * (n_blocks - 1) + [n_samples - block_size * (n_blocks - 1)]

    def run(b):
        return _block_sums(model, seed, b, sizes[b])

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(b) for b in range(n_blocks)]

    s = b = ind = s2 = b2 = sb = 0.0
    for ps, pb, pi, ps2, pb2, psb in parts:
        s += ps
        b += pb
        ind += pi
        s2 += ps2
        b2 += pb2
        sb += psb

    p_insure = insured_proportion(model)
    n = float(n_samples)
    if b > 0.0:
        ratio = min(s / b, 1.0)
        mean_s, mean_b = s / n, b / n
        var_s = max(s2 / n - mean_s * mean_s, 0.0)
        var_b = max(b2 / n - mean_b * mean_b, 0.0)
        cov = sb / n - mean_s * mean_b
        var_ratio = max(var_s - 2.0 * ratio * cov + ratio * ratio * var_b, 0.0) / (n * mean_b * mean_b)
        se_ratio = math.sqrt(var_ratio)
    else:
        ratio = 0.0
        se_ratio = 0.0
    p_uninsure = 1.0 - p_insure
    return EnsuranceEstimate(
        p_ei=1.0 - p_uninsure * ratio,
        p_insure=p_insure,
        shortage_ratio=ratio,
        indicator_rate=ind / n,
        n_samples=n_samples,
        seed=int(seed),
        std_error=p_uninsure * se_ratio,
    )


def _expected_shortfall(c, mean, sd):
    """E[(c - D)^+] for D ~ Normal(mean, sd)."""
    z = (c - mean) / sd
    return (c - mean) * special.ndtr(z) + sd * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def ensurance_quadrature(
    model: PopulationModel,
    tail_eps: float = DEFAULT_TAIL_EPS,
    *,
    index_cap: int = DEFAULT_INDEX_CAP,
) -> QuadratureResult:
    """Deterministic population expectations behind P_ei.

    Sums exactly over the Poisson index (dropping tails of total mass below
    ``tail_eps``) and integrates the income Normal in closed form.
    """
    if not 0.0 < tail_eps <= 1e-6:
        raise DomainError(f"tail_eps must lie in (0, 1e-6], got {tail_eps!r}")
    rate = model.lambda_med / model.money_quantum
    lo = int(stats.poisson.ppf(tail_eps / 2.0, rate))
    hi = int(stats.poisson.isf(tail_eps / 2.0, rate))
    n_terms = hi - lo + 1
    if n_terms > index_cap:
        raise ResourceLimitError(
            f"Poisson truncation needs {n_terms} terms (cap {index_cap}); increase money_quantum"
        )
    k = np.arange(lo, hi + 1, dtype=np.float64)
    pmf = stats.poisson.pmf(k, rate)
    burden = k * model.money_quantum * (1.0 - model.k_gov)
    mean_disp = model.mu_inc - model.essential_expense
    sd = model.sigma_inc
    positive = burden > 0.0
    shortfall = np.where(
        positive,
        _expected_shortfall(burden, mean_disp, sd) - _expected_shortfall(0.0, mean_disp, sd),
        0.0,
    )
    p_in_set = np.where(positive, special.ndtr((burden - mean_disp) / sd), 0.0)

    e_short = float(np.dot(pmf, shortfall))
    e_burden = float(np.dot(pmf, burden))
    e_ind = float(np.dot(pmf, p_in_set))
    p_insure = insured_proportion(model)
    # shortage <= burden pointwise; summation rounding can break that by an ulp
    ratio = min(e_short / e_burden, 1.0) if e_burden > 0.0 else 0.0
    return QuadratureResult(
        p_ei=1.0 - (1.0 - p_insure) * ratio,
        p_insure=p_insure,
        expected_shortage=e_short,
        expected_burden=e_burden,
        indicator_rate=e_ind,
        n_terms=n_terms,
    )


def perfect_ensurance_quadrature(
    model: PopulationModel,
    tail_eps: float = DEFAULT_TAIL_EPS,
    *,
    index_cap: int = DEFAULT_INDEX_CAP,
) -> float:
    return ensurance_quadrature(model, tail_eps, index_cap=index_cap).p_ei


def perfect_ensurance_closed(
    f_income: float,
    f_med: float,
    f_gov1: float,
    p_uninsure: float,
    e_indicator: float,
) -> float:
    """Aggregate closed form of P_ei as a function of patient aid ``f_gov1``.

    ``1 - p_uninsure * e_indicator * (1 - f_income / (f_med - f_gov1))``,
    clamped into [0, 1]. ``e_indicator`` is the shortage-set share, held
    fixed rather than re-derived as aid changes.
    """
    if f_income < 0 or f_gov1 < 0:
        raise DomainError("f_income and f_gov1 must be >= 0")
    if not 0.0 <= p_uninsure <= 1.0:
        raise DomainError("p_uninsure must lie in [0, 1]")
    if not 0.0 <= e_indicator <= 1.0:
        raise DomainError("e_indicator must lie in [0, 1]")
    if f_gov1 >= f_med:
        raise SingularityError(f"f_gov1 ({f_gov1!r}) must be below f_med ({f_med!r})")
    value = 1.0 - (p_uninsure * e_indicator) * (1.0 - f_income / (f_med - f_gov1))
    return min(max(value, 0.0), 1.0)
