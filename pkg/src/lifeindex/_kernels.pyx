# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Semantics mirror ``_pykernels`` exactly."""

import numpy as np
from libc.math cimport INFINITY

N_PARAMS = 14

cdef int P_F_INCOME = 0
cdef int P_F_MED = 1
cdef int P_PU_E = 2
cdef int P_KN_S = 3
cdef int P_K_M = 4
cdef int P_NE_KE = 5
cdef int P_NC_KC = 8
cdef int P_E0 = 11
cdef int P_KLT = 12
cdef int P_KQ = 13

# Zero-based members of each multiplicative group, -1 padded.
cdef int _GROUP_MEMBERS[3][3]
for _g, _row in enumerate(((1, 2, -1), (3, 4, 5), (6, 7, 8))):
    for _i in range(3):
        _GROUP_MEMBERS[_g][_i] = _row[_i]


def shortage_block_sums(const double[::1] x_med, const double[::1] x_inc,
                        double one_minus_kgov, double essential_expense):
    cdef Py_ssize_t n = x_med.shape[0], i
    cdef double s = 0.0, b = 0.0, ind = 0.0, s2 = 0.0, b2 = 0.0, sb = 0.0
    cdef double burden, floor, short
    if x_inc.shape[0] != n:
        raise ValueError("x_med and x_inc must have equal length")
    with nogil:
        for i in range(n):
            burden = x_med[i] * one_minus_kgov
            floor = x_inc[i] - essential_expense
            if floor < 0.0:
                floor = 0.0
            if burden > floor:
                short = burden - floor
                ind += 1.0
                s += short
                s2 += short * short
                sb += short * burden
            b += burden
            b2 += burden * burden
    return (s, b, ind, s2, b2, sb)


cdef inline void _components(const double* total, const double* params,
                             double* p_ei, double* p_mr, double* p_hc) noexcept nogil:
    cdef double pe = 1.0 - params[P_PU_E] * (1.0 - params[P_F_INCOME] / (params[P_F_MED] - total[0]))
    if pe > 1.0:
        pe = 1.0
    elif pe < 0.0:
        pe = 0.0
    cdef double hc = (total[1] / (params[P_KN_S] + total[1])) * (total[2] / (params[P_K_M] + total[2]))
    cdef double ess = 1.0, comp = 1.0
    cdef int i
    for i in range(3):
        ess *= total[3 + i] / (total[3 + i] + params[P_NE_KE + i])
        comp *= total[6 + i] / (total[6 + i] + params[P_NC_KC + i])
    p_ei[0] = pe
    p_mr[0] = ess + comp
    p_hc[0] = hc


cdef inline double _objective(const double* total, const double* params) noexcept nogil:
    cdef double pe, mr, hc
    _components(total, params, &pe, &mr, &hc)
    return (pe + mr + hc) * (params[P_E0] + params[P_KLT] * hc) / params[P_KQ]


def _param_buffer(params):
    cdef double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    if p.shape[0] != N_PARAMS:
        raise ValueError(f"expected {N_PARAMS} packed parameters, got {p.shape[0]}")
    return p


def components_flat(total, params):
    cdef double[::1] t = np.ascontiguousarray(total, dtype=np.float64)
    cdef double[::1] p = _param_buffer(params)
    cdef double pe, mr, hc
    _components(&t[0], &p[0], &pe, &mr, &hc)
    return pe, mr, hc


def objective_flat(total, params):
    cdef double[::1] t = np.ascontiguousarray(total, dtype=np.float64)
    cdef double[::1] p = _param_buffer(params)
    return _objective(&t[0], &p[0])


def greedy_counts(params, baseline, allowed, double step, long n_full,
                  double remainder, double cap_x1):
    cdef double[::1] p = _param_buffer(params)
    cdef double[::1] base_v = np.ascontiguousarray(baseline, dtype=np.float64)
    cdef long[9] counts
    cdef int[9] allow
    cdef double[9] total
    cdef double[9] trial
    cdef long left = n_full, iterations = 0, r, best_r = 0
    cdef int rem_index = -1, j, i, g, m, best_kind = 0
    cdef bint last_partial = remainder > 0.0, partial
    cdef double base, best, gain, x_j, max_gain = 0.0
    for j in range(9):
        counts[j] = 0
        allow[j] = 1 if allowed[j] else 0

    with nogil:
        while left > 0 or last_partial:
            partial = left == 0
            for j in range(9):
                total[j] = base_v[j] + counts[j] * step
            base = _objective(total, &p[0])

            best = -INFINITY
            best_kind = -1
            best_r = 0
            for j in range(9):
                if not allow[j]:
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
                    trial[j] = base_v[j] + x_j
                    gain = (_objective(trial, &p[0]) - base) / <double>r
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
                    for i in range(3):
                        j = _GROUP_MEMBERS[g][i]
                        if j >= 0 and allow[j] and total[j] == 0.0:
                            m += 1
                    if m < 2:
                        continue
                    r = 1
                    while m * r <= left:
                        for i in range(9):
                            trial[i] = total[i]
                        for i in range(3):
                            j = _GROUP_MEMBERS[g][i]
                            if j >= 0 and allow[j] and total[j] == 0.0:
                                trial[j] = base_v[j] + (counts[j] + r) * step
                        gain = (_objective(trial, &p[0]) - base) / <double>(m * r)
                        if gain > best:
                            best = gain
                            best_kind = 9 + g
                            best_r = r
                        r *= 2

            if best_kind < 0:
                break
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
                g = best_kind - 9
                for i in range(3):
                    j = _GROUP_MEMBERS[g][i]
                    if j >= 0 and allow[j] and total[j] == 0.0:
                        counts[j] += best_r
                        left -= best_r

    status = 1 if best_kind < 0 and (left > 0 or last_partial) else 0
    return [counts[j] for j in range(9)], rem_index, iterations, max_gain, status


def grid_argmax(params, baseline, dims, double chunk, long chunks, double cap_x1):
    cdef double[::1] p = _param_buffer(params)
    cdef double[::1] base_v = np.ascontiguousarray(baseline, dtype=np.float64)
    cdef int d = len(dims), q, last, i
    cdef int[4] dim_idx
    cdef long[4] c
    cdef long[4] best_c
    cdef double[9] total
    cdef double x, value, best = -INFINITY
    cdef long n_eval = 0, tail
    cdef bint feasible, found = False
    if d < 1 or d > 4:
        raise ValueError("grid_argmax supports 1 to 4 dimensions")
    for q in range(d):
        dim_idx[q] = dims[q]
        c[q] = 0
        best_c[q] = 0
    c[d - 1] = chunks

    with nogil:
        while True:
            feasible = True
            for i in range(9):
                total[i] = base_v[i]
            for q in range(d):
                x = c[q] * chunk
                if dim_idx[q] == 0 and x > cap_x1:
                    feasible = False
                total[dim_idx[q]] = base_v[dim_idx[q]] + x
            if feasible:
                value = _objective(total, &p[0])
                n_eval += 1
                if value > best:
                    best = value
                    found = True
                    for q in range(d):
                        best_c[q] = c[q]
            last = -1
            for q in range(d - 1, 0, -1):
                if c[q] > 0:
                    last = q
                    break
            if last < 0:
                break
            i = last - 1
            tail = 0
            for q in range(i + 1, d):
                tail += c[q]
                c[q] = 0
            c[i] += 1
            c[d - 1] = tail - 1

    if not found:
        return None, best, n_eval
    return [best_c[q] for q in range(d)], best, n_eval
