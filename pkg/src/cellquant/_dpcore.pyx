# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dynamic-programming kernel.

Same contract as :func:`cellquant._dp_python.dp_solve`.
"""

import numpy as np

from libc.math cimport log2, pow, INFINITY

cdef enum:
    KIND_ZERO = 0
    KIND_ENTROPY = 1
    KIND_LINEAR = 2
    KIND_POWER = 3


cdef inline double _hb(double c) noexcept nogil:
    if c <= 0.0 or c >= 1.0:
        return 0.0
    return -c * log2(c) - (1.0 - c) * log2(1.0 - c)


cdef inline double _penalty(int kind, double a, double b, double w) noexcept nogil:
    if kind == KIND_ZERO:
        return 0.0
    if kind == KIND_ENTROPY:
        if w > 0.0:
            return -a * w * log2(w)
        return 0.0
    if kind == KIND_LINEAR:
        return a * w
    return a * pow(w, b)


cdef inline double _cost(const double[::1] s0, const double[::1] s1, const double[::1] sh,
                         Py_ssize_t i, Py_ssize_t j, double beta,
                         int kind, double a, double b) noexcept nogil:
    cdef double w = s0[j] - s0[i]
    cdef double c = 0.0
    cdef double d = 0.0
    cdef double wc
    if w > 0.0:
        c = (s1[j] - s1[i]) / w
        if c < 0.0:
            c = 0.0
        elif c > 1.0:
            c = 1.0
        d = w * _hb(c) - (sh[j] - sh[i])
        if d < 0.0:
            d = 0.0
    wc = w
    if wc < 0.0:
        wc = 0.0
    elif wc > 1.0:
        wc = 1.0
    return beta * d + _penalty(kind, a, b, wc)


def interval_cost(s0, s1, sh, Py_ssize_t i, Py_ssize_t j, double beta,
                  int kind, double a, double b):
    return _cost(np.ascontiguousarray(s0, dtype=np.float64),
                 np.ascontiguousarray(s1, dtype=np.float64),
                 np.ascontiguousarray(sh, dtype=np.float64), i, j, beta, kind, a, b)


def dp_solve(s0_in, s1_in, sh_in, double beta, kinds_in, pa_in, pb_in):
    cdef const double[::1] s0 = np.ascontiguousarray(s0_in, dtype=np.float64)
    cdef const double[::1] s1 = np.ascontiguousarray(s1_in, dtype=np.float64)
    cdef const double[::1] sh = np.ascontiguousarray(sh_in, dtype=np.float64)
    cdef const long long[::1] kinds = np.ascontiguousarray(kinds_in, dtype=np.int64)
    cdef const double[::1] pa = np.ascontiguousarray(pa_in, dtype=np.float64)
    cdef const double[::1] pb = np.ascontiguousarray(pb_in, dtype=np.float64)
    cdef Py_ssize_t m = s0.shape[0] - 1
    cdef Py_ssize_t n_cells = kinds.shape[0]
    prev_arr = np.full(m + 1, np.inf)
    cur_arr = np.empty(m + 1)
    arg_arr = np.zeros((n_cells, m + 1), dtype=np.int64)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    cdef long long[:, ::1] arg = arg_arr
    cdef Py_ssize_t n, i, j, best_i
    cdef double best, tot, a, b
    cdef int kind
    prev[0] = 0.0
    with nogil:
        for n in range(n_cells):
            kind = <int>kinds[n]
            a = pa[n]
            b = pb[n]
            for j in range(m + 1):
                best = INFINITY
                best_i = 0
                for i in range(j + 1):
                    tot = prev[i] + _cost(s0, s1, sh, i, j, beta, kind, a, b)
                    if tot < best:
                        best = tot
                        best_i = i
                cur[j] = best
                arg[n, j] = best_i
            tmp = prev
            prev = cur
            cur = tmp
    bounds = np.zeros(n_cells + 1, dtype=np.int64)
    bounds[n_cells] = m
    for n in range(n_cells - 1, -1, -1):
        bounds[n] = arg_arr[n, bounds[n + 1]]
    return float(prev[m]), bounds
