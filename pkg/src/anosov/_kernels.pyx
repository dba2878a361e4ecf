# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: all-pairs Dijkstra and common-prefix lengths."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

cnp.import_array()


cdef inline void _push(double* hk, long* hv, long* size, double key, long val) noexcept nogil:
    cdef long i = size[0]
    cdef long p
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if hk[p] <= key:
            break
        hk[i] = hk[p]
        hv[i] = hv[p]
        i = p
    hk[i] = key
    hv[i] = val


cdef inline void _pop(double* hk, long* hv, long* size) noexcept nogil:
    cdef long n = size[0] - 1
    cdef double key = hk[n]
    cdef long val = hv[n]
    cdef long i = 0
    cdef long c
    size[0] = n
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and hk[c + 1] < hk[c]:
            c += 1
        if key <= hk[c]:
            break
        hk[i] = hk[c]
        hv[i] = hv[c]
        i = c
    if n > 0:
        hk[i] = key
        hv[i] = val


def dijkstra_rows(const long[::1] indptr, const long[::1] indices, const double[::1] weights,
                  const long[::1] sources, double[:, ::1] out):
    """Fill ``out[r]`` with shortest-path distances from ``sources[r]``."""
    cdef long n = indptr.shape[0] - 1
    cdef long m = indices.shape[0]
    cdef long ns = sources.shape[0]
    cdef long r, s, u, v, e, size
    cdef double du, nd
    cdef double* hk = <double*> malloc((m + n + 1) * sizeof(double))
    cdef long* hv = <long*> malloc((m + n + 1) * sizeof(long))
    if hk == NULL or hv == NULL:
        free(hk)
        free(hv)
        raise MemoryError()
    with nogil:
        for r in range(ns):
            s = sources[r]
            for u in range(n):
                out[r, u] = INFINITY
            out[r, s] = 0.0
            size = 0
            _push(hk, hv, &size, 0.0, s)
            while size > 0:
                du = hk[0]
                u = hv[0]
                _pop(hk, hv, &size)
                if du > out[r, u]:
                    continue
                for e in range(indptr[u], indptr[u + 1]):
                    v = indices[e]
                    nd = du + weights[e]
                    if nd < out[r, v]:
                        out[r, v] = nd
                        _push(hk, hv, &size, nd, v)
    free(hk)
    free(hv)


def common_prefix_lengths(const long[:, ::1] prefix_table, i, j):
    """Length of the longest common prefix of words ``i[k]`` and ``j[k]``."""
    cdef const long[::1] ii = np.ascontiguousarray(i, dtype=np.int64)
    cdef const long[::1] jj = np.ascontiguousarray(j, dtype=np.int64)
    cdef long npairs = ii.shape[0]
    cdef long width = prefix_table.shape[1]
    out_arr = np.zeros(npairs, dtype=np.int64)
    cdef long[::1] out = out_arr
    cdef long k, m, a, b
    with nogil:
        for k in range(npairs):
            a = ii[k]
            b = jj[k]
            m = 0
            while m + 1 < width and prefix_table[a, m + 1] >= 0 \
                    and prefix_table[a, m + 1] == prefix_table[b, m + 1]:
                m += 1
            out[k] = m
    return out_arr
