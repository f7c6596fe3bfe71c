"""Random allocation instances for property tests and benchmarks.

Scales are drawn relative to the budget so every term of the objective moves
noticeably within it. Nothing here reflects real country data.
"""

from __future__ import annotations

import numpy as np

from .allocator import N_CATEGORIES, AllocationProblem
from .model_core import ModelCoefficients, SaturationCoefficients


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_problem(rng: np.random.Generator, *, with_baseline: bool | None = None) -> AllocationProblem:
    f_total = _log_uniform(rng, 1e2, 1e6)
    f_med = f_total * _log_uniform(rng, 0.5, 5.0)
    s_salary = _log_uniform(rng, 0.02, 0.2)
    n_e = tuple(_log_uniform(rng, 1e2, 1e5) for _ in range(3))
    n_c = tuple(_log_uniform(rng, 1e2, 1e5) for _ in range(3))
    k_e = tuple(f_total * _log_uniform(rng, 0.01, 1.0) / n for n in n_e)
    k_c = tuple(f_total * _log_uniform(rng, 0.01, 1.0) / n for n in n_c)
    coeffs = ModelCoefficients(
        k_q=4.0,
        k_N=f_total * _log_uniform(rng, 0.01, 1.0) / s_salary,
        k_M=f_total * _log_uniform(rng, 0.01, 1.0),
        E_0=float(rng.uniform(50.0, 80.0)),
        k_lt=float(rng.uniform(0.0, 20.0)),
    )
    if with_baseline is None:
        with_baseline = bool(rng.integers(2))
    baseline = [0.0] * N_CATEGORIES
    if with_baseline:
        baseline = [f_total * float(rng.uniform(0.0, 0.5)) for _ in range(N_CATEGORIES)]
        baseline[0] = min(baseline[0], 0.45 * f_med)
    return AllocationProblem(
        f_total=f_total,
        f_med=f_med,
        f_income=f_med * float(rng.uniform(0.0, 1.0)),
        p_uninsure=float(rng.uniform(0.0, 0.5)),
        e_indicator=float(rng.uniform(0.0, 1.0)),
        s_salary=s_salary,
        n_unit_essential=n_e,
        n_unit_complementary=n_c,
        coeffs=coeffs,
        sat=SaturationCoefficients(k_e, k_c),
        baseline=tuple(baseline),
    )


def random_problems(seed: int, count: int, **kwargs) -> list[AllocationProblem]:
    rng = np.random.default_rng(seed)
    return [random_problem(rng, **kwargs) for _ in range(count)]


def reduced_instance(variant: int = 0) -> AllocationProblem:
    """Small hand-sized instance for solver cross-checks over categories 1-3.

    ``k_N * s_salary == k_M`` so research salaries and research funding enter
    symmetrically. Variant 0 has the interior grid optimum (200, 400, 400) at
    ten chunks; variant 1 has the optimum (0, 500, 500) on the face without
    patient aid.
    """
    f_med, f_income, p_un, e_ind = ((1000.0, 800.0, 0.6, 1.0), (1200.0, 1000.0, 0.5, 0.9))[variant]
    return AllocationProblem(
        f_total=1000.0,
        f_med=f_med,
        f_income=f_income,
        p_uninsure=p_un,
        e_indicator=e_ind,
        s_salary=0.1,
        n_unit_essential=(1.0, 1.0, 1.0),
        n_unit_complementary=(1.0, 1.0, 1.0),
        coeffs=ModelCoefficients(k_N=3000.0, k_M=300.0),
        sat=SaturationCoefficients((1.0, 1.0, 1.0), (1.0, 1.0, 1.0)),
    )
