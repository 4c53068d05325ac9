# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for dense matrix arithmetic over a prime field F_p.

All matrices are C-contiguous numpy uint64 arrays with entries already
reduced into [0, p).  p must fit in 62 bits so that sums of two entries
never overflow an unsigned 64-bit word.  Products go through unsigned
128-bit intermediates; the default modulus 2^61 - 1 takes a shift-and-add
reduction instead of a hardware divide, which is what makes large
eliminations affordable.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint64_t

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

cdef uint64_t M61 = (<uint64_t>1 << 61) - 1

BACKEND_NAME = "compiled"


cdef inline uint64_t _mulmod(uint64_t a, uint64_t b, uint64_t p) nogil:
    cdef u128 t = <u128>a * b
    cdef uint64_t r
    if p == M61:
        r = (<uint64_t>(t & M61)) + (<uint64_t>(t >> 61))
        r = (r & M61) + (r >> 61)
        if r >= M61:
            r -= M61
        return r
    return <uint64_t>(t % p)


cdef inline uint64_t _submod(uint64_t a, uint64_t b, uint64_t p) nogil:
    return a - b if a >= b else a + p - b


cdef uint64_t _powmod(uint64_t a, uint64_t e, uint64_t p) nogil:
    cdef uint64_t r = 1 % p
    while e:
        if e & 1:
            r = _mulmod(r, a, p)
        a = _mulmod(a, a, p)
        e >>= 1
    return r


cdef inline uint64_t _invmod(uint64_t a, uint64_t p) nogil:
    # p prime, a != 0
    return _powmod(a, p - 2, p)


def mat_mul(cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] a,
            cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] b,
            uint64_t p):
    """Return a @ b mod p."""
    cdef Py_ssize_t n = a.shape[0], k = a.shape[1], m = b.shape[1]
    if b.shape[0] != k:
        raise ValueError("inner dimensions do not match")
    cdef cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] out = np.zeros((n, m), dtype=np.uint64)
    cdef uint64_t[:, ::1] av = a
    cdef uint64_t[:, ::1] bv = b
    cdef uint64_t[:, ::1] ov = out
    cdef Py_ssize_t i, j, t
    cdef uint64_t aij, acc
    with nogil:
        for i in range(n):
            for t in range(k):
                aij = av[i, t]
                if aij == 0:
                    continue
                for j in range(m):
                    acc = ov[i, j] + _mulmod(aij, bv[t, j], p)
                    if acc >= p:
                        acc -= p
                    ov[i, j] = acc
    return out


def scalar_mat_mul(uint64_t s,
                   cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] a,
                   uint64_t p):
    """Return s * a mod p."""
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1]
    cdef cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] out = np.empty((n, m), dtype=np.uint64)
    cdef uint64_t[:, ::1] av = a
    cdef uint64_t[:, ::1] ov = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(m):
                ov[i, j] = _mulmod(s, av[i, j], p)
    return out


def mat_rank(cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] a, uint64_t p):
    """Row rank of a over F_p (gaussian elimination on a scratch copy)."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] m = a.copy()
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef uint64_t[:, ::1] mv = m
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef uint64_t inv_p, f, fm
    with nogil:
        for c in range(cols):
            if r == rows:
                break
            piv = -1
            for i in range(r, rows):
                if mv[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(c, cols):
                    mv[piv, j], mv[r, j] = mv[r, j], mv[piv, j]
            inv_p = _invmod(mv[r, c], p)
            for i in range(r + 1, rows):
                if mv[i, c] == 0:
                    continue
                f = _mulmod(mv[i, c], inv_p, p)
                mv[i, c] = 0
                for j in range(c + 1, cols):
                    fm = _mulmod(f, mv[r, j], p)
                    mv[i, j] = _submod(mv[i, j], fm, p)
            r += 1
    return r


def mat_inv(cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] a, uint64_t p):
    """Inverse of a over F_p, or None when a is singular."""
    cdef Py_ssize_t n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("matrix is not square")
    cdef cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] m = a.copy()
    cdef cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] out = np.zeros((n, n), dtype=np.uint64)
    cdef uint64_t[:, ::1] mv = m
    cdef uint64_t[:, ::1] ov = out
    cdef Py_ssize_t c, i, j, piv
    cdef uint64_t inv_p, f, fm
    cdef int singular = 0
    for i in range(n):
        ov[i, i] = 1 % p
    with nogil:
        for c in range(n):
            piv = -1
            for i in range(c, n):
                if mv[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                singular = 1
                break
            if piv != c:
                for j in range(n):
                    mv[piv, j], mv[c, j] = mv[c, j], mv[piv, j]
                    ov[piv, j], ov[c, j] = ov[c, j], ov[piv, j]
            inv_p = _invmod(mv[c, c], p)
            for j in range(n):
                mv[c, j] = _mulmod(mv[c, j], inv_p, p)
                ov[c, j] = _mulmod(ov[c, j], inv_p, p)
            for i in range(n):
                if i == c:
                    continue
                f = mv[i, c]
                if f == 0:
                    continue
                for j in range(n):
                    fm = _mulmod(f, mv[c, j], p)
                    mv[i, j] = _submod(mv[i, j], fm, p)
                    fm = _mulmod(f, ov[c, j], p)
                    ov[i, j] = _submod(ov[i, j], fm, p)
    if singular:
        return None
    return out
