"""Pure-Python fallback for the modular matrix kernels.

Mirrors the compiled extension exactly: same function names, same argument
conventions (C-contiguous uint64 arrays, entries in [0, p)), same pivoting
order, so every result is bit-identical to the compiled path.  Arithmetic
happens on Python ints, which handle the 122-bit products natively.
"""

import numpy as np

BACKEND_NAME = "pure"


def _rows(a):
    return [[int(x) for x in row] for row in a.tolist()]


def mat_mul(a, b, p):
    """Return a @ b mod p."""
    n, k = a.shape
    kb, m = b.shape
    if kb != k:
        raise ValueError("inner dimensions do not match")
    ar, br = _rows(a), _rows(b)
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        row_a = ar[i]
        row_o = out[i]
        for t in range(k):
            ait = row_a[t]
            if ait == 0:
                continue
            row_b = br[t]
            for j in range(m):
                row_o[j] = (row_o[j] + ait * row_b[j]) % p
    return np.array(out, dtype=np.uint64).reshape(n, m)


def scalar_mat_mul(s, a, p):
    """Return s * a mod p."""
    s = int(s)
    out = [[(s * int(x)) % p for x in row] for row in a.tolist()]
    return np.array(out, dtype=np.uint64).reshape(a.shape)


def mat_rank(a, p):
    """Row rank of a over F_p."""
    m = _rows(a)
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[piv], m[r] = m[r], m[piv]
        inv_p = pow(m[r][c], p - 2, p)
        for i in range(r + 1, rows):
            if m[i][c] == 0:
                continue
            f = (m[i][c] * inv_p) % p
            m[i][c] = 0
            row_r = m[r]
            row_i = m[i]
            for j in range(c + 1, cols):
                row_i[j] = (row_i[j] - f * row_r[j]) % p
        r += 1
    return r


def mat_inv(a, p):
    """Inverse of a over F_p, or None when a is singular."""
    n, nc = a.shape
    if nc != n:
        raise ValueError("matrix is not square")
    m = _rows(a)
    out = [[1 % p if i == j else 0 for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return None
        if piv != c:
            m[piv], m[c] = m[c], m[piv]
            out[piv], out[c] = out[c], out[piv]
        inv_p = pow(m[c][c], p - 2, p)
        m[c] = [(x * inv_p) % p for x in m[c]]
        out[c] = [(x * inv_p) % p for x in out[c]]
        for i in range(n):
            if i == c or m[i][c] == 0:
                continue
            f = m[i][c]
            row_mc, row_oc = m[c], out[c]
            m[i] = [(x - f * y) % p for x, y in zip(m[i], row_mc)]
            out[i] = [(x - f * y) % p for x, y in zip(out[i], row_oc)]
    return np.array(out, dtype=np.uint64).reshape(n, n)
