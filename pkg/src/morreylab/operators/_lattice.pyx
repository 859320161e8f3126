# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pair-lattice reduction for the bilinear operators.

For every target t this computes

    out[t] = sum_{i, j} table[o1[t, i], o2[t, j]] * F[i] * G[j] * mask * factor

where mask selects the pairs outside the truncation region and factor is
the optional commutator factor (bx[t] - b1[i]) or (bx[t] - b2[j]).
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def lattice_sum(
    const double[:, ::1] table,
    const cnp.int64_t[:, ::1] o1,
    const cnp.int64_t[:, ::1] o2,
    const double[:, ::1] r1,
    const double[:, ::1] r2,
    const double[::1] F,
    const double[::1] G,
    double eps2,
    bint product,
    const double[::1] bx,
    const double[::1] b1,
    const double[::1] b2,
    int slot,
):
    cdef Py_ssize_t T = o1.shape[0]
    cdef Py_ssize_t S1 = o1.shape[1]
    cdef Py_ssize_t S2 = o2.shape[1]
    cdef Py_ssize_t t, i, j
    cdef double acc, inner, fi, ri, rj, bt
    cdef const double* row
    out = np.zeros(T, dtype=np.float64)
    cdef double[::1] res = out
    for t in range(T):
        acc = 0.0
        bt = bx[t] if slot != 0 else 0.0
        for i in range(S1):
            fi = F[i]
            if fi == 0.0:
                continue
            ri = r1[t, i]
            row = &table[o1[t, i], 0]
            inner = 0.0
            if product:
                if ri <= eps2:
                    continue
                if slot == 2:
                    for j in range(S2):
                        if r2[t, j] > eps2:
                            inner += row[o2[t, j]] * G[j] * (bt - b2[j])
                else:
                    for j in range(S2):
                        if r2[t, j] > eps2:
                            inner += row[o2[t, j]] * G[j]
            else:
                if slot == 2:
                    for j in range(S2):
                        if ri + r2[t, j] > eps2:
                            inner += row[o2[t, j]] * G[j] * (bt - b2[j])
                else:
                    for j in range(S2):
                        if ri + r2[t, j] > eps2:
                            inner += row[o2[t, j]] * G[j]
            if slot == 1:
                acc += inner * fi * (bt - b1[i])
            else:
                acc += inner * fi
        res[t] = acc
    return out
