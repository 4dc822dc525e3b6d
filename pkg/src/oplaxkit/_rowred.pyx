# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled F_p row-reduction and matrix-product kernels.

Same contract as the pure twin in ``_rowred_py``: flat row-major int buffers,
first-nonzero-in-column-order pivoting. Moduli are < 2^31 so products fit in
64 bits.
"""

from cpython cimport array
import array

cdef long long _pow_mod(long long b, long long e, long long p):
    cdef long long r = 1
    b %= p
    while e > 0:
        if e & 1:
            r = (r * b) % p
        b = (b * b) % p
        e >>= 1
    return r


def matmul_mod(long long p, Py_ssize_t n, Py_ssize_t m, Py_ssize_t k, object a, object b):
    cdef array.array abuf = array.array('q', a)
    cdef array.array bbuf = array.array('q', b)
    cdef array.array obuf = array.array('q', bytes(8 * n * k))
    cdef long long[:] av = abuf
    cdef long long[:] bv = bbuf
    cdef long long[:] ov = obuf
    cdef Py_ssize_t i, j, t
    cdef long long x
    for i in range(n):
        for t in range(m):
            x = av[i * m + t]
            if x:
                for j in range(k):
                    ov[i * k + j] = (ov[i * k + j] + x * bv[t * k + j]) % p
    return list(obuf)


def rref_mod(long long p, Py_ssize_t rows, Py_ssize_t cols, object entries):
    cdef array.array buf = array.array('q', entries)
    cdef long long[:] m = buf
    cdef Py_ssize_t c, r, rr, j, piv_r = 0
    cdef long long inv, f, tmp, v
    pivots = []
    for j in range(rows * cols):
        v = m[j] % p
        if v < 0:
            v += p
        m[j] = v
    for c in range(cols):
        if piv_r == rows:
            break
        r = piv_r
        while r < rows and m[r * cols + c] == 0:
            r += 1
        if r == rows:
            continue
        if r != piv_r:
            for j in range(cols):
                tmp = m[r * cols + j]
                m[r * cols + j] = m[piv_r * cols + j]
                m[piv_r * cols + j] = tmp
        inv = _pow_mod(m[piv_r * cols + c], p - 2, p)
        if inv != 1:
            for j in range(c, cols):
                m[piv_r * cols + j] = (m[piv_r * cols + j] * inv) % p
        for rr in range(rows):
            if rr == piv_r:
                continue
            f = m[rr * cols + c]
            if f:
                for j in range(c, cols):
                    v = (m[rr * cols + j] - f * m[piv_r * cols + j]) % p
                    if v < 0:
                        v += p
                    m[rr * cols + j] = v
        pivots.append(c)
        piv_r += 1
    return list(buf), pivots
