"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times each hot kernel on both backends with identical inputs, checks that the
results agree, and prints a table of best-of-N timings and speedups.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lifeindex import kernels
from lifeindex.synthetic import random_problems


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    probs = random_problems(123, 20)
    params = [p.packed_params() for p in probs]
    bases = [np.asarray(p.baseline) for p in probs]
    totals = [b + p.f_total / 9 for b, p in zip(bases, probs)]
    rng = np.random.default_rng(0)
    x_med = rng.poisson(800.0, 1 << 18).astype(np.float64)
    x_inc = rng.normal(3000.0, 1000.0, 1 << 18)

    def objective(b):
        return [b.objective_flat(t, q) for t, q in zip(totals, params) for _ in range(50)]

    def greedy(b):
        return [
            tuple(b.greedy_counts(q, base, [1] * 9, p.f_total / 300, 300, 0.0, p.increment_aid_cap))
            for q, base, p in zip(params, bases, probs)
        ]

    def grid(b):
        return [
            tuple(b.grid_argmax(q, base, [0, 1, 2], p.f_total / 30, 30, p.increment_aid_cap))
            for q, base, p in zip(params, bases, probs)
        ]

    def shortage(b):
        return b.shortage_block_sums(x_med, x_inc, 0.7, 2500.0)

    return {
        "objective_flat (1000 calls)": (objective, True),
        "greedy_counts (20 x 300 chunks)": (greedy, True),
        "grid_argmax (20 x 496 points)": (grid, True),
        "shortage_block_sums (262144 draws)": (shortage, False),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not available; only the Python backend can be timed")
    print(f"{'kernel':<38}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}  agree")
    for label, (fn, exact) in cases().items():
        times = {name: best_of(lambda b=b: fn(b), args.repeat) for name, b in backends.items()}
        results = {name: fn(b) for name, b in backends.items()}
        values = list(results.values())
        if exact:
            agree = all(v == values[0] for v in values)
        else:
            agree = all(np.allclose(v, values[0], rtol=1e-12) for v in values)
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        row = "".join(f"{times[name] * 1e3:>10.2f}ms" for name in backends)
        print(f"{label:<38}{row}{speedup:>9.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
