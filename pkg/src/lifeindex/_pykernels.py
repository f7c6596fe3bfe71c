"""Pure-Python implementations of the hot kernels.

Mirrors ``_kernels.pyx`` operation for operation so that the scalar kernels
(objective, greedy, grid) give bit-identical results on either backend. The
Monte Carlo block sums use numpy reductions here and a sequential loop in the
compiled version, so those agree only to rounding.
"""

from __future__ import annotations

import math

import numpy as np

# Layout of the packed parameter vector shared with the compiled kernels.
P_F_INCOME = 0
P_F_MED = 1
P_PU_E = 2
P_KN_S = 3
P_K_M = 4
P_NE_KE = 5  # 5, 6, 7
P_NC_KC = 8  # 8, 9, 10
P_E0 = 11
P_KLT = 12
P_KQ = 13
N_PARAMS = 14

# Zero-based categories whose shares multiply together.
GROUPS = ((1, 2), (3, 4, 5), (6, 7, 8))

STATUS_OK = 0
STATUS_NO_CANDIDATE = 1


def shortage_block_sums(x_med, x_inc, one_minus_kgov, essential_expense):
    """Return (sum shortage, sum burden, sum indicator, sum s^2, sum b^2, sum s*b)."""
    burden = np.asarray(x_med, dtype=np.float64) * one_minus_kgov
    disposable = np.asarray(x_inc, dtype=np.float64) - essential_expense
    floor = np.maximum(disposable, 0.0)
    ind = burden > floor
    short = np.where(ind, burden - floor, 0.0)
    return (
        float(short.sum()),
        float(burden.sum()),
        float(np.count_nonzero(ind)),
        float(np.dot(short, short)),
        float(np.dot(burden, burden)),
        float(np.dot(short, burden)),
    )


def components_flat(total, params):
    """(p_ei, p_mr, p_hc) for a full nine-way spending vector."""
    f_income = params[P_F_INCOME]
    f_med = params[P_F_MED]
    p_ei = 1.0 - params[P_PU_E] * (1.0 - f_income / (f_med - total[0]))
    if p_ei > 1.0:
        p_ei = 1.0
    elif p_ei < 0.0:
        p_ei = 0.0
    p_hc = (total[1] / (params[P_KN_S] + total[1])) * (total[2] / (params[P_K_M] + total[2]))
    ess = 1.0
    comp = 1.0
    for i in range(3):
        ess *= total[3 + i] / (total[3 + i] + params[P_NE_KE + i])
        comp *= total[6 + i] / (total[6 + i] + params[P_NC_KC + i])
    return p_ei, ess + comp, p_hc


def objective_flat(total, params):
    p_ei, p_mr, p_hc = components_flat(total, params)
    return (p_ei + p_mr + p_hc) * (params[P_E0] + params[P_KLT] * p_hc) / params[P_KQ]


def greedy_counts(params, baseline, allowed, step, n_full, remainder, cap_x1):
    """Chunked greedy marginal allocation with block look-ahead.

    Candidate moves each round are the single admissible categories and, for
    each multiplicative group with two or more unfunded members, the bundle
    funding all of them equally. Every move is scored at block sizes of
    1, 2, 4, ... chunks (per member) by its average objective gain per chunk
    spent, and the best (move, size) pair is committed. Ties keep the first
    found: smaller blocks, single categories before bundles, lower indices
    first. A trailing partial chunk (``remainder``) goes to the best single
    category.

    Returns (counts, remainder_index, iterations, max_gain, status).
    """
    counts = [0] * 9
    rem_index = -1
    iterations = 0
    max_gain = 0.0
    total = [0.0] * 9
    trial = [0.0] * 9
    left = n_full
    last_partial = remainder > 0.0

    while left > 0 or last_partial:
        partial = left == 0
        for j in range(9):
            total[j] = baseline[j] + counts[j] * step
        base = objective_flat(total, params)

        best = -math.inf
        best_kind = -1  # 0..8 single category, 9..11 bundle group
        best_r = 0
        for j in range(9):
            if not allowed[j]:
                continue
            r = 1
            while True:
                if partial:
                    x_j = counts[j] * step + remainder
                elif r <= left:
                    x_j = (counts[j] + r) * step
                else:
                    break
                if j == 0 and x_j > cap_x1:
                    break
                for i in range(9):
                    trial[i] = total[i]
                trial[j] = baseline[j] + x_j
                gain = (objective_flat(trial, params) - base) / r
                if gain > best:
                    best = gain
                    best_kind = j
                    best_r = r
                if partial:
                    break
                r *= 2
        if not partial:
            for g in range(3):
                m = 0
                for j in GROUPS[g]:
                    if allowed[j] and total[j] == 0.0:
                        m += 1
                if m < 2:
                    continue
                r = 1
                while m * r <= left:
                    for i in range(9):
                        trial[i] = total[i]
                    for j in GROUPS[g]:
                        if allowed[j] and total[j] == 0.0:
                            trial[j] = baseline[j] + (counts[j] + r) * step
                    gain = (objective_flat(trial, params) - base) / (m * r)
                    if gain > best:
                        best = gain
                        best_kind = 9 + g
                        best_r = r
                    r *= 2

        if best_kind < 0:
            return counts, rem_index, iterations, max_gain, STATUS_NO_CANDIDATE
        if best > max_gain:
            max_gain = best
        iterations += 1
        if partial:
            rem_index = best_kind
            last_partial = False
        elif best_kind < 9:
            counts[best_kind] += best_r
            left -= best_r
        else:
            for j in GROUPS[best_kind - 9]:
                if allowed[j] and total[j] == 0.0:
                    counts[j] += best_r
                    left -= best_r
    return counts, rem_index, iterations, max_gain, STATUS_OK


def grid_argmax(params, baseline, dims, chunk, chunks, cap_x1):
    """Exhaustive search over compositions of ``chunks`` into ``dims``.

    Compositions are visited in ascending lexicographic order of their count
    tuples and only a strictly better objective replaces the incumbent.
    Returns (best_counts, best_objective, n_evaluated).
    """
    d = len(dims)
    c = [0] * d
    c[d - 1] = chunks
    total = [0.0] * 9
    best = -math.inf
    best_counts = None
    n_eval = 0
    while True:
        feasible = True
        for j in range(9):
            total[j] = baseline[j]
        for p in range(d):
            x = c[p] * chunk
            if dims[p] == 0 and x > cap_x1:
                feasible = False
            total[dims[p]] = baseline[dims[p]] + x
        if feasible:
            value = objective_flat(total, params)
            n_eval += 1
            if value > best:
                best = value
                best_counts = list(c)
        # lexicographic successor
        last = -1
        for p in range(d - 1, 0, -1):
            if c[p] > 0:
                last = p
                break
        if last < 0:
            break
        i = last - 1
        tail = 0
        for p in range(i + 1, d):
            tail += c[p]
            c[p] = 0
        c[i] += 1
        c[d - 1] = tail - 1
    return best_counts, best, n_eval
