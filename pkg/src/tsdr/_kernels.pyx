# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_fallback.py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, cos
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _unif(uint64_t seed, uint64_t ctr) nogil:
    return (<double>(_mix(seed + ctr * GOLDEN) >> 11) + 0.5) * INV_2_53


def hash_counters(seed, start, Py_ssize_t n):
    cdef uint64_t s = <uint64_t>int(seed)
    cdef uint64_t c0 = <uint64_t>int(start)
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _mix(s + (c0 + <uint64_t>(i + 1)) * GOLDEN)
    return out


def uniform_fill(seed, start, Py_ssize_t n):
    cdef uint64_t s = <uint64_t>int(seed)
    cdef uint64_t c0 = <uint64_t>int(start)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _unif(s, c0 + <uint64_t>(i + 1))
    return out


def normal_fill(seed, start, Py_ssize_t n):
    cdef uint64_t s = <uint64_t>int(seed)
    cdef uint64_t c0 = <uint64_t>int(start)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t k
    cdef double u1, u2
    with nogil:
        for k in range(n):
            u1 = _unif(s, c0 + <uint64_t>(2 * k + 1))
            u2 = _unif(s, c0 + <uint64_t>(2 * k + 2))
            o[k] = sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)
    return out


def cholesky_lower(m):
    a_arr = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t d = a.shape[0]
    L_arr = np.zeros((d, d), dtype=np.float64)
    cdef double[:, ::1] L = L_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, ljj
    cdef Py_ssize_t fail = -1
    with nogil:
        for j in range(d):
            acc = a[j, j]
            for k in range(j):
                acc -= L[j, k] * L[j, k]
            if not acc > 0.0:
                fail = j
                break
            ljj = sqrt(acc)
            L[j, j] = ljj
            for i in range(j + 1, d):
                acc = a[i, j]
                for k in range(j):
                    acc -= L[i, k] * L[j, k]
                L[i, j] = acc / ljj
    return L_arr, fail


def auc_counts(pos, neg):
    p_arr = np.sort(np.ascontiguousarray(pos, dtype=np.float64))
    n_arr = np.sort(np.ascontiguousarray(neg, dtype=np.float64))
    cdef double[::1] p = p_arr
    cdef double[::1] q = n_arr
    cdef Py_ssize_t np_ = p.shape[0]
    cdef Py_ssize_t nq = q.shape[0]
    cdef Py_ssize_t i, lo = 0, hi = 0
    cdef int64_t greater = 0, ties = 0
    with nogil:
        for i in range(np_):
            while lo < nq and q[lo] < p[i]:
                lo += 1
            if hi < lo:
                hi = lo
            while hi < nq and q[hi] <= p[i]:
                hi += 1
            greater += lo
            ties += hi - lo
    return int(greater), int(ties)


def strict_below_counts(sorted_ref, values):
    r_arr = np.ascontiguousarray(sorted_ref, dtype=np.float64)
    v_arr = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] r = r_arr
    cdef double[::1] v = v_arr
    cdef Py_ssize_t m = r.shape[0]
    cdef Py_ssize_t n = v.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t i, lo, hi, mid
    with nogil:
        for i in range(n):
            lo = 0
            hi = m
            while lo < hi:
                mid = (lo + hi) >> 1
                if r[mid] < v[i]:
                    lo = mid + 1
                else:
                    hi = mid
            o[i] = lo
    return out
