# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the similarity and entropy hot loops.

Rows are accumulated with plain vectorizable loops; the per-row sums are
then combined with Kahan compensation, which keeps the total error near
row length times machine epsilon even on large universes.
"""

from libc.math cimport fabs

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "native"


def similarity_matrix(values, double radius):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] m = out
    cdef Py_ssize_t i, j
    cdef double gap, r
    with nogil:
        for i in range(n):
            m[i, i] = 1.0
            for j in range(i + 1, n):
                gap = fabs(v[i] - v[j])
                r = 1.0 - gap if gap <= radius else 0.0
                m[i, j] = r
                m[j, i] = r
    return out


cdef inline double _row_sum(const double[:, ::1] a, Py_ssize_t i) noexcept nogil:
    # four independent accumulators: fixed summation order, no serial chain
    cdef const double* row = &a[i, 0]
    cdef Py_ssize_t n = a.shape[1], j = 0
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    while j + 4 <= n:
        s0 += row[j]
        s1 += row[j + 1]
        s2 += row[j + 2]
        s3 += row[j + 3]
        j += 4
    while j < n:
        s0 += row[j]
        j += 1
    return (s0 + s1) + (s2 + s3)


cdef inline double _min2(double x, double y) noexcept nogil:
    return x if x <= y else y


cdef inline double _min_row_sum(const double[:, ::1] a, const double[:, ::1] b,
                                Py_ssize_t i) noexcept nogil:
    cdef const double* ra = &a[i, 0]
    cdef const double* rb = &b[i, 0]
    cdef Py_ssize_t n = a.shape[1], j = 0
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    while j + 4 <= n:
        s0 += _min2(ra[j], rb[j])
        s1 += _min2(ra[j + 1], rb[j + 1])
        s2 += _min2(ra[j + 2], rb[j + 2])
        s3 += _min2(ra[j + 3], rb[j + 3])
        j += 4
    while j < n:
        s0 += _min2(ra[j], rb[j])
        j += 1
    return (s0 + s1) + (s2 + s3)


def row_sums(a):
    cdef double[:, ::1] m = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _row_sum(m, i)
    return out


def intersection_row_sums(a, b):
    cdef double[:, ::1] ma = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] mb = np.ascontiguousarray(b, dtype=np.float64)
    if ma.shape[0] != mb.shape[0] or ma.shape[1] != mb.shape[1]:
        raise ValueError("matrix shapes differ")
    cdef Py_ssize_t n = ma.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _min_row_sum(ma, mb, i)
    return out


def pairwise_min_totals(stack):
    cdef double[:, :, ::1] s = np.ascontiguousarray(stack, dtype=np.float64)
    cdef Py_ssize_t d = s.shape[0], n = s.shape[1]
    out = np.empty((d, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, b, i
    cdef double tot, comp, y, t, part
    with nogil:
        for p in range(d):
            tot = 0.0
            comp = 0.0
            for i in range(n):
                part = _row_sum(s[p], i)
                y = part - comp
                t = tot + y
                comp = (t - tot) - y
                tot = t
            o[p, p] = tot
            for b in range(p + 1, d):
                tot = 0.0
                comp = 0.0
                for i in range(n):
                    part = _min_row_sum(s[p], s[b], i)
                    y = part - comp
                    t = tot + y
                    comp = (t - tot) - y
                    tot = t
                o[p, b] = tot
                o[b, p] = tot
    return out
