"""Nine-way budget allocation maximizing the life index.

Spending categories (1-based, as in reports):

    1 economic aid to patients        4-6 essential doctors / nurses / equipment
    2 research staff salaries         7-9 complementary doctors / nurses / equipment
    3 research funding

A problem may carry ``baseline`` spending already in place; solvers allocate
the budget ``f_total`` on top of it and every formula sees ``baseline + x``.
Patient aid is capped at ``aid_cap_fraction * f_med`` (total, not increment)
because the closed-form ensurance index has a pole at ``f_med``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from math import comb
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .ensurance import perfect_ensurance_closed
from .errors import ConstraintError, DomainError, NumericalError, ResourceLimitError
from .model_core import ModelCoefficients, SaturationCoefficients

N_CATEGORIES = 9
CATEGORY_NAMES = (
    "patient_aid",
    "research_salaries",
    "research_funding",
    "essential_doctors",
    "essential_nurses",
    "essential_equipment",
    "complementary_doctors",
    "complementary_nurses",
    "complementary_equipment",
)
SOLVERS = ("greedy", "ascent", "grid")
DEFAULT_CHUNKS = 300
BUDGET_RTOL = 1e-12
GRID_GUARD = 10_000_000


@dataclass(frozen=True)
class ExpenditureVector:
    f: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.f)
        if len(values) != N_CATEGORIES:
            raise DomainError(f"expenditure vector needs {N_CATEGORIES} entries, got {len(values)}")
        for i, v in enumerate(values, start=1):
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"F_gov,{i} must be finite and >= 0, got {v!r}")
        object.__setattr__(self, "f", values)

    @classmethod
    def zeros(cls) -> "ExpenditureVector":
        return cls((0.0,) * N_CATEGORIES)

    def total(self) -> float:
        return math.fsum(self.f)

    def __getitem__(self, category: int) -> float:
        """1-based category access."""
        if not 1 <= category <= N_CATEGORIES:
            raise IndexError(category)
        return self.f[category - 1]


@dataclass(frozen=True)
class AllocationProblem:
    f_total: float
    f_med: float
    f_income: float
    p_uninsure: float
    e_indicator: float
    s_salary: float
    n_unit_essential: tuple[float, float, float]
    n_unit_complementary: tuple[float, float, float]
    coeffs: ModelCoefficients
    sat: SaturationCoefficients
    baseline: tuple[float, ...] = (0.0,) * N_CATEGORIES
    aid_cap_fraction: float = 0.95

    def __post_init__(self):
        for name in ("f_total", "f_med", "f_income", "p_uninsure", "e_indicator",
                     "s_salary", "aid_cap_fraction"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.f_total <= 0 or self.f_med <= 0 or self.s_salary <= 0:
            raise DomainError("f_total, f_med and s_salary must be > 0")
        if self.f_income < 0:
            raise DomainError("f_income must be >= 0")
        if not 0 <= self.p_uninsure <= 1 or not 0 <= self.e_indicator <= 1:
            raise DomainError("p_uninsure and e_indicator must lie in [0, 1]")
        if not 0 < self.aid_cap_fraction < 1:
            raise DomainError("aid_cap_fraction must lie in (0, 1)")
        for name in ("n_unit_essential", "n_unit_complementary"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != 3 or any(not math.isfinite(v) or v <= 0 for v in values):
                raise DomainError(f"{name} must be 3 finite values > 0")
            object.__setattr__(self, name, values)
        object.__setattr__(self, "baseline", ExpenditureVector(self.baseline).f)

    @property
    def aid_cap(self) -> float:
        """Upper bound on total patient aid (baseline plus increment)."""
        return self.aid_cap_fraction * self.f_med

    @property
    def increment_aid_cap(self) -> float:
        return self.aid_cap - self.baseline[0]

    def with_budget(self, f_total: float) -> "AllocationProblem":
        return replace(self, f_total=f_total)

    def packed_params(self) -> np.ndarray:
        p = np.empty(kernels.N_PARAMS)
        p[0] = self.f_income
        p[1] = self.f_med
        p[2] = self.p_uninsure * self.e_indicator
        p[3] = self.coeffs.k_N * self.s_salary
        p[4] = self.coeffs.k_M
        for i in range(3):
            p[5 + i] = self.n_unit_essential[i] * self.sat.k_essential[i]
            p[8 + i] = self.n_unit_complementary[i] * self.sat.k_complementary[i]
        p[11] = self.coeffs.E_0
        p[12] = self.coeffs.k_lt
        p[13] = self.coeffs.k_q
        return p


@dataclass(frozen=True)
class AllocationPlan:
    x: ExpenditureVector
    objective: float
    components: tuple[float, float, float]  # (p_ei, p_mr, p_hc)
    feasible: bool
    solver: str
    iterations: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_dict(self, prob: AllocationProblem | None = None) -> dict:
        out = {
            "solver": self.solver,
            "objective": self.objective,
            "feasible": self.feasible,
            "iterations": self.iterations,
            "components": dict(zip(("p_ei", "p_mr", "p_hc"), self.components)),
            "allocation": dict(zip(CATEGORY_NAMES, self.x.f)),
            "allocation_sum": self.x.total(),
            "diagnostics": dict(self.diagnostics),
        }
        if prob is not None:
            out["budget"] = prob.f_total
            out["baseline"] = dict(zip(CATEGORY_NAMES, prob.baseline))
            out["total_spending"] = dict(
                zip(CATEGORY_NAMES, (b + v for b, v in zip(prob.baseline, self.x.f)))
            )
        return out


def _totals(x: ExpenditureVector, prob: AllocationProblem) -> tuple[float, ...]:
    return tuple(b + v for b, v in zip(prob.baseline, x.f))


def p_ei_of(x: ExpenditureVector, prob: AllocationProblem) -> float:
    aid = prob.baseline[0] + x.f[0]
    if aid > prob.aid_cap:
        raise ConstraintError(
            "aid_cap", f"patient aid {aid!r} exceeds {prob.aid_cap_fraction} * f_med = {prob.aid_cap!r}"
        )
    return perfect_ensurance_closed(prob.f_income, prob.f_med, aid, prob.p_uninsure, prob.e_indicator)


def p_hc_of(x: ExpenditureVector, prob: AllocationProblem) -> float:
    t = _totals(x, prob)
    salaries, funding = t[1], t[2]
    return (salaries / (prob.coeffs.k_N * prob.s_salary + salaries)) * (
        funding / (prob.coeffs.k_M + funding)
    )


def p_mr_of(x: ExpenditureVector, prob: AllocationProblem) -> float:
    t = _totals(x, prob)
    ess = 1.0
    comp = 1.0
    for i in range(3):
        ess *= t[3 + i] / (t[3 + i] + prob.n_unit_essential[i] * prob.sat.k_essential[i])
        comp *= t[6 + i] / (t[6 + i] + prob.n_unit_complementary[i] * prob.sat.k_complementary[i])
    return ess + comp


def objective(x: ExpenditureVector, prob: AllocationProblem) -> float:
    """L_index at ``x``: ``(P_ei + P_mr + P_hc) * (E_0 + k_lt * P_hc) / k_q``.

    The research term is the current P_hc, not the delayed P_tech.
    """
    p_hc = p_hc_of(x, prob)
    total = p_ei_of(x, prob) + p_mr_of(x, prob) + p_hc
    return total * (prob.coeffs.E_0 + prob.coeffs.k_lt * p_hc) / prob.coeffs.k_q


def _normalize_dims(dims: Iterable[int] | None) -> list[int]:
    """1-based category numbers -> sorted 0-based indices."""
    if dims is None:
        return list(range(N_CATEGORIES))
    out = sorted({int(d) for d in dims})
    if not out or out[0] < 1 or out[-1] > N_CATEGORIES:
        raise DomainError(f"dims must be a nonempty subset of 1..{N_CATEGORIES}, got {dims!r}")
    return [d - 1 for d in out]


def _check_cap_config(prob: AllocationProblem, idx: Sequence[int]) -> None:
    if prob.increment_aid_cap < 0:
        raise ConstraintError(
            "aid_cap",
            f"baseline patient aid {prob.baseline[0]!r} already exceeds the cap {prob.aid_cap!r}",
        )
    if list(idx) == [0] and prob.f_total > prob.increment_aid_cap:
        raise ConstraintError(
            "aid_cap", "budget cannot be spent: patient aid is the only category and its cap binds"
        )


def _repair_budget(values: list[float], f_total: float, idx: Sequence[int], cap_x1: float) -> list[float]:
    """Push the rounding residual of the budget sum onto the largest admissible entry."""
    residual = f_total - math.fsum(values)
    if residual == 0.0:
        return values
    order = sorted(idx, key=lambda j: (-values[j], j))
    for j in order:
        candidate = values[j] + residual
        if candidate < 0:
            continue
        if j == 0 and candidate > cap_x1:
            continue
        values[j] = candidate
        break
    return values


def _make_plan(values, prob, solver, iterations, diagnostics=None) -> AllocationPlan:
    x = ExpenditureVector(values)
    comps = kernels.components_flat(np.asarray(_totals(x, prob)), prob.packed_params())
    value = kernels.objective_flat(np.asarray(_totals(x, prob)), prob.packed_params())
    return AllocationPlan(
        x=x,
        objective=float(value),
        components=tuple(float(c) for c in comps),
        feasible=is_feasible(x, prob),
        solver=solver,
        iterations=int(iterations),
        diagnostics=dict(diagnostics or {}),
    )


def is_feasible(x: ExpenditureVector, prob: AllocationProblem) -> bool:
    budget_ok = abs(math.fsum(x.f) - prob.f_total) <= prob.f_total * BUDGET_RTOL
    return budget_ok and prob.baseline[0] + x.f[0] <= prob.aid_cap and min(x.f) >= 0


def uniform_split(prob: AllocationProblem, dims: Iterable[int] | None = None) -> ExpenditureVector:
    """Equal shares over ``dims``; patient aid is cut to its cap and the excess re-spread."""
    idx = _normalize_dims(dims)
    _check_cap_config(prob, idx)
    values = [0.0] * N_CATEGORIES
    share = prob.f_total / len(idx)
    cap = prob.increment_aid_cap
    if 0 in idx and share > cap:
        values[0] = cap
        rest = [j for j in idx if j != 0]
        for j in rest:
            values[j] = (prob.f_total - cap) / len(rest)
    else:
        for j in idx:
            values[j] = share
    return ExpenditureVector(_repair_budget(values, prob.f_total, idx, cap))


def evaluate_plan(x: ExpenditureVector, prob: AllocationProblem, solver: str = "fixed") -> AllocationPlan:
    return _make_plan(list(x.f), prob, solver, 0)


def _chunking(f_total: float, step: float) -> tuple[int, float]:
    n = round(f_total / step)
    if n >= 1 and abs(f_total - n * step) <= 1e-9 * step:
        return int(n), 0.0
    n_full = int(f_total // step)
    remainder = f_total - n_full * step
    if remainder <= f_total * BUDGET_RTOL:
        remainder = 0.0
    return n_full, remainder


def greedy_allocate(
    prob: AllocationProblem,
    step: float | None = None,
    dims: Iterable[int] | None = None,
) -> AllocationPlan:
    """Chunked greedy marginal allocation starting from zero extra spending.

    Every round scores the increment of each admissible category. Because the
    research and resource indices are products, a lone increment to an
    unfunded member of a product group gains nothing; so for any group with
    two or more unfunded members the round also scores the bundle that funds
    all of them. Each move is tried at 1, 2, 4, ... chunks and ranked by its
    gain per chunk spent, which lets the greedy cross the convex start of a
    product term. The best score wins; ties go to the smaller block, then to
    single categories, then to the lower category. Default step is
    ``f_total / 300``.
    """
    idx = _normalize_dims(dims)
    if step is None:
        step = prob.f_total / DEFAULT_CHUNKS
    step = float(step)
    if not math.isfinite(step) or step <= 0:
        raise DomainError(f"step must be > 0, got {step!r}")
    if step > prob.f_total * (1 + 1e-12):
        raise DomainError(f"step {step!r} exceeds the budget {prob.f_total!r}")
    _check_cap_config(prob, idx)
    n_full, remainder = _chunking(prob.f_total, step)
    allowed = [1 if j in idx else 0 for j in range(N_CATEGORIES)]
    cap = prob.increment_aid_cap
    counts, rem_index, iterations, max_gain, status = kernels.greedy_counts(
        prob.packed_params(), np.asarray(prob.baseline), allowed, step, n_full, remainder, cap
    )
    if status != kernels.STATUS_OK:
        raise ConstraintError("aid_cap", "no admissible category left for the remaining budget")
    values = [c * step for c in counts]
    if rem_index >= 0:
        values[rem_index] += remainder
    values = _repair_budget(values, prob.f_total, idx, cap)
    return _make_plan(
        values, prob, "greedy", iterations,
        {"step": step, "chunks": n_full + (1 if remainder > 0 else 0), "max_chunk_gain": max_gain,
         "backend": kernels.BACKEND},
    )


def project_capped_simplex(v: np.ndarray, total: float, idx: Sequence[int], cap_x1: float) -> np.ndarray:
    """Euclidean projection onto {sum x = total, x >= 0, x[0] <= cap_x1, x = 0 off idx}.

    The projection is ``clip(v - theta, 0, upper)``; the mass is piecewise
    linear and decreasing in ``theta`` with kinks at ``v`` and ``v - upper``,
    so theta is found exactly by scanning the sorted kinks.
    """
    idx = list(idx)
    sub = np.asarray(v, dtype=np.float64)[idx]
    upper = np.full(len(idx), np.inf)
    if 0 in idx:
        upper[idx.index(0)] = cap_x1

    def mass(theta):
        return float(np.clip(sub - theta, 0.0, upper).sum())

    kinks = np.unique(np.concatenate([sub, (sub - upper)[np.isfinite(upper)]]))
    # mass(kinks[-1]) == 0 <= total; walk down to the first kink with mass >= total
    theta = kinks[0] - total
    for a, b in zip(kinks[::-1][1:], kinks[::-1][:-1]):
        m_a = mass(a)
        if m_a >= total:
            m_b = mass(b)
            theta = a if m_a == m_b else a + (m_a - total) * (b - a) / (m_a - m_b)
            break
    else:
        if mass(kinks[0]) >= total:
            theta = kinks[0]
        else:
            # below every kink the free coordinates move one-for-one with theta
            free = int(np.count_nonzero(~np.isfinite(upper) | (sub - kinks[0] < upper)))
            theta = kinks[0] - (total - mass(kinks[0])) / max(free, 1)
    out = np.zeros(N_CATEGORIES)
    out[idx] = np.clip(sub - theta, 0.0, upper)
    return np.asarray(_repair_budget(list(out), total, idx, cap_x1))


def _gradient(x: np.ndarray, prob, params, idx, chunk) -> np.ndarray:
    """Finite-difference gradient: central where both sides are admissible, else one-sided."""
    base = np.asarray(prob.baseline)
    f0 = kernels.objective_flat(base + x, params)
    g = np.zeros(N_CATEGORIES)
    for j in idx:
        h = 1e-6 * max(x[j], chunk)
        can_up = not (j == 0 and x[j] + h > prob.increment_aid_cap)
        can_down = x[j] >= h
        up = x.copy()
        up[j] += h
        down = x.copy()
        down[j] -= h
        if can_up and can_down:
            g[j] = (kernels.objective_flat(base + up, params)
                    - kernels.objective_flat(base + down, params)) / (2 * h)
        elif can_up:
            g[j] = (kernels.objective_flat(base + up, params) - f0) / h
        else:
            g[j] = (f0 - kernels.objective_flat(base + down, params)) / h
    return g


def projected_ascent(
    prob: AllocationProblem,
    start: ExpenditureVector,
    max_iters: int = 500,
    tol: float = 1e-8,
    dims: Iterable[int] | None = None,
) -> AllocationPlan:
    """Projected gradient ascent with backtracking, in budget-share coordinates.

    Works on ``y = x / f_total`` so ``tol`` bounds the norm of the projected
    gradient step ``P(y + grad_y) - y`` independently of the money scale.
    Only steps that increase the objective are accepted.
    """
    idx = _normalize_dims(dims)
    _check_cap_config(prob, idx)
    if not is_feasible(start, prob) or any(start.f[j] != 0 for j in range(N_CATEGORIES) if j not in idx):
        raise ConstraintError("start", "projected_ascent needs a feasible start vector")
    if max_iters < 0:
        raise DomainError("max_iters must be >= 0")
    params = prob.packed_params()
    base = np.asarray(prob.baseline)
    cap = prob.increment_aid_cap
    F = prob.f_total
    chunk = F / DEFAULT_CHUNKS

    x = np.asarray(start.f, dtype=np.float64)
    value = kernels.objective_flat(base + x, params)
    accepted = 0
    alpha = 1.0
    pg_norm = math.inf
    reason = "max_iters"
    for _ in range(max_iters):
        g = _gradient(x, prob, params, idx, chunk)
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient at x={x.tolist()}")
        g_y = g * F
        y = x / F
        pg = project_capped_simplex((y + g_y) * F, F, idx, cap) / F - y
        pg_norm = float(np.linalg.norm(pg))
        if pg_norm <= tol:
            reason = "converged"
            break
        alpha = min(alpha * 2.0, 1e6)
        moved = False
        for _ls in range(80):
            cand = project_capped_simplex(x + alpha * g_y * F, F, idx, cap)
            cand_value = kernels.objective_flat(base + cand, params)
            if not math.isfinite(cand_value):
                raise NumericalError(f"non-finite objective at x={cand.tolist()}")
            if cand_value > value + 1e-4 * float(np.dot(g, cand - x)) and cand_value > value:
                x, value = cand, cand_value
                moved = True
                break
            alpha *= 0.5
        if not moved:
            reason = "line_search_stalled"
            break
        accepted += 1
    return _make_plan(
        list(x), prob, "ascent", accepted,
        {"projected_gradient_norm": pg_norm, "stop_reason": reason, "tol": tol},
    )


def grid_oracle(prob: AllocationProblem, dims: Iterable[int], chunks: int) -> AllocationPlan:
    """Exhaustive best composition of ``chunks`` equal chunks over ``dims`` (at most 4)."""
    idx = _normalize_dims(dims)
    if len(idx) > 4:
        raise ResourceLimitError(f"grid search supports at most 4 dimensions, got {len(idx)}")
    if int(chunks) != chunks or chunks < 1:
        raise DomainError(f"chunks must be a positive integer, got {chunks!r}")
    n_comp = comb(int(chunks) + len(idx) - 1, len(idx) - 1)
    if n_comp > GRID_GUARD:
        raise ResourceLimitError(f"{n_comp} compositions exceed the guard of {GRID_GUARD}")
    _check_cap_config(prob, idx)
    chunk = prob.f_total / chunks
    cap = prob.increment_aid_cap
    counts, best, n_eval = kernels.grid_argmax(
        prob.packed_params(), np.asarray(prob.baseline), idx, chunk, int(chunks), cap
    )
    if counts is None:
        raise ConstraintError("aid_cap", "no composition satisfies the patient-aid cap")
    values = [0.0] * N_CATEGORIES
    for j, c in zip(idx, counts):
        values[j] = c * chunk
    values = _repair_budget(values, prob.f_total, idx, cap)
    return _make_plan(
        values, prob, "grid", n_eval,
        {"chunks": int(chunks), "compositions": n_comp, "dims": [j + 1 for j in idx],
         "grid_objective": best},
    )


def optimize(
    prob: AllocationProblem,
    solver: str = "ascent",
    step: float | None = None,
    dims: Iterable[int] | None = None,
    chunks: int = 10,
    max_iters: int = 500,
    tol: float = 1e-8,
) -> AllocationPlan:
    """Run a named solver. ``ascent`` means greedy followed by projected-ascent refinement."""
    if solver not in SOLVERS:
        raise DomainError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    if solver == "grid":
        return grid_oracle(prob, dims if dims is not None else (1, 2, 3), chunks)
    greedy = greedy_allocate(prob, step, dims)
    if solver == "greedy":
        return greedy
    refined = projected_ascent(prob, greedy.x, max_iters=max_iters, tol=tol, dims=dims)
    diagnostics = dict(refined.diagnostics)
    diagnostics["greedy_objective"] = greedy.objective
    diagnostics["greedy_iterations"] = greedy.iterations
    return replace(refined, diagnostics=diagnostics)
