# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled permanent kernels.

All three kernels accumulate in double precision with a fixed serial
evaluation order (canonical reflected Gray code, flipped bit = lowest set
bit of the ascending loop counter; products and running sums taken in
ascending index order), so results are bit-for-bit reproducible and match
the pure-Python fallback in ``_kernels_py`` exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ldexp

ctypedef double complex cplx

cnp.import_array()


cdef inline int _lowest_set_bit(unsigned long long k) noexcept:
    cdef int b = 0
    while not (k & 1ULL):
        k >>= 1
        b += 1
    return b


def glynn(cplx[:, ::1] a):
    """Glynn-formula permanent over the 2^(n-1) sign vectors."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, r
    cdef unsigned long long k, top
    cdef int b, sgn
    cdef double coef
    cdef cplx total, p, s

    if n < 1:
        raise ValueError("empty matrix")
    if n > 62:
        raise ValueError("matrix dimension above exact-kernel limit (62)")

    cdef cnp.ndarray[cplx, ndim=1] vbuf = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] v = vbuf
    cdef cnp.ndarray[cnp.int8_t, ndim=1] dbuf = np.ones(n, dtype=np.int8)
    cdef cnp.int8_t[::1] d = dbuf

    for j in range(n):
        s = a[0, j]
        for i in range(1, n):
            s = s + a[i, j]
        v[j] = s

    p = v[0]
    for j in range(1, n):
        p = p * v[j]
    total = p

    sgn = 1
    top = 1ULL << (n - 1)
    for k in range(1, top):
        b = _lowest_set_bit(k)
        r = b + 1
        d[r] = -d[r]
        coef = 2.0 * d[r]
        for j in range(n):
            v[j] = v[j] + coef * a[r, j]
        sgn = -sgn
        p = v[0]
        for j in range(1, n):
            p = p * v[j]
        if sgn > 0:
            total = total + p
        else:
            total = total - p

    return total / ldexp(1.0, n - 1)


def ryser(cplx[:, ::1] a):
    """Ryser inclusion-exclusion permanent over column subsets."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef unsigned long long k, top
    cdef int b, sgn
    cdef cplx total, p

    if n < 1:
        raise ValueError("empty matrix")
    if n > 62:
        raise ValueError("matrix dimension above exact-kernel limit (62)")

    cdef cnp.ndarray[cplx, ndim=1] vbuf = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] v = vbuf
    cdef cnp.ndarray[cnp.int8_t, ndim=1] membuf = np.zeros(n, dtype=np.int8)
    cdef cnp.int8_t[::1] mem = membuf

    total = 0
    sgn = 1
    top = (1ULL << n) - 1ULL
    for k in range(1, top + 1):
        b = _lowest_set_bit(k)
        if mem[b]:
            mem[b] = 0
            for i in range(n):
                v[i] = v[i] - a[i, b]
        else:
            mem[b] = 1
            for i in range(n):
                v[i] = v[i] + a[i, b]
        sgn = -sgn
        p = v[0]
        for i in range(1, n):
            p = p * v[i]
        if sgn > 0:
            total = total + p
        else:
            total = total - p

    if n % 2:
        return -total
    return total


cdef cplx _naive_rec(cplx[:, ::1] a, Py_ssize_t row, unsigned long long used,
                     Py_ssize_t n) noexcept:
    cdef cplx s = 0
    cdef Py_ssize_t j
    if row == n:
        return 1
    for j in range(n):
        if not (used >> j) & 1ULL:
            s = s + a[row, j] * _naive_rec(a, row + 1, used | (1ULL << j), n)
    return s


def naive(cplx[:, ::1] a):
    """Definition-level permanent: sum over all permutations (row expansion)."""
    cdef Py_ssize_t n = a.shape[0]
    if n < 1:
        raise ValueError("empty matrix")
    return _naive_rec(a, 0, 0, n)
