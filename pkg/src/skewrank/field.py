"""Exact arithmetic in a prime field F_p and dense matrix operations.

Everything downstream (formula evaluation, blow-up ranks, certificate
checks) funnels through the handful of kernels here.  The default modulus is
the Mersenne prime 2^61 - 1: large enough that a single random substitution
has negligible failure probability in every identity test the package runs,
small enough that entries stay inside machine words.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from ._kernels import BACKEND, mat_inv, mat_mul, mat_rank, scalar_mat_mul

__all__ = [
    "DEFAULT_PRIME",
    "PrimeField",
    "FieldMatrix",
    "rank",
    "inverse",
    "random_matrix",
    "is_prime",
    "BACKEND",
]

DEFAULT_PRIME = 2**61 - 1

# entries and their pairwise sums must fit in uint64
_MAX_MODULUS = 2**62

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3 * 10^24."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    """The prime field F_p.  Elements are plain ints in [0, p)."""

    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if not (2 <= self.p < _MAX_MODULUS):
            raise ValueError(f"modulus must be in [2, 2^62), got {self.p}")
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")

    def reduce(self, x: int) -> int:
        return x % self.p

    def neg_one(self) -> int:
        return self.p - 1

    def inv(self, x: int) -> int:
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of 0 in F_p")
        return pow(x, self.p - 2, self.p)

    def identity(self, k: int) -> "FieldMatrix":
        m = np.zeros((k, k), dtype=np.uint64)
        np.fill_diagonal(m, 1 % self.p)
        return FieldMatrix(self, m)

    def zeros(self, rows: int, cols: int) -> "FieldMatrix":
        return FieldMatrix(self, np.zeros((rows, cols), dtype=np.uint64))

    def scalar_matrix(self, c: int, k: int) -> "FieldMatrix":
        m = np.zeros((k, k), dtype=np.uint64)
        np.fill_diagonal(m, self.reduce(c))
        return FieldMatrix(self, m)

    def matrix(self, rows) -> "FieldMatrix":
        arr = np.array([[self.reduce(int(x)) for x in row] for row in rows], dtype=np.uint64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array of entries")
        return FieldMatrix(self, arr)


DEFAULT_FIELD = PrimeField(DEFAULT_PRIME)


class FieldMatrix:
    """Dense matrix over F_p.  Immutable by convention: no method mutates."""

    __slots__ = ("field", "array")

    def __init__(self, field: PrimeField, array: np.ndarray):
        if array.dtype != np.uint64 or array.ndim != 2:
            raise ValueError("expected a 2-D uint64 array")
        self.field = field
        self.array = np.ascontiguousarray(array)

    @property
    def rows(self) -> int:
        return self.array.shape[0]

    @property
    def cols(self) -> int:
        return self.array.shape[1]

    @property
    def shape(self):
        return self.array.shape

    def __repr__(self):
        return f"FieldMatrix(p={self.field.p}, {self.array.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return (
            self.field.p == other.field.p
            and self.shape == other.shape
            and bool(np.array_equal(self.array, other.array))
        )

    def __hash__(self):
        return hash((self.field.p, self.array.tobytes()))

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check(other)
        return FieldMatrix(self.field, (self.array + other.array) % np.uint64(self.field.p))

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check(other)
        p = np.uint64(self.field.p)
        return FieldMatrix(self.field, (self.array + (p - other.array)) % p)

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check(other, same_shape=False)
        return FieldMatrix(self.field, mat_mul(self.array, other.array, self.field.p))

    def scale(self, c: int) -> "FieldMatrix":
        c = self.field.reduce(c)
        return FieldMatrix(self.field, scalar_mat_mul(c, self.array, self.field.p))

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(self.field, np.ascontiguousarray(self.array.T))

    def rank(self) -> int:
        return mat_rank(self.array, self.field.p)

    def inverse(self):
        """M^-1 when M is square and nonsingular, else None."""
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        inv = mat_inv(self.array, self.field.p)
        return None if inv is None else FieldMatrix(self.field, inv)

    def is_zero(self) -> bool:
        return not self.array.any()

    def is_identity(self) -> bool:
        return self == self.field.identity(self.rows)

    def _check(self, other: "FieldMatrix", same_shape: bool = True):
        if self.field.p != other.field.p:
            raise ValueError("mixed moduli")
        if same_shape and self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")


def rank(m: FieldMatrix) -> int:
    """Row rank of m over F_p."""
    return m.rank()


def inverse(m: FieldMatrix):
    """Inverse of a square matrix, or None when singular."""
    return m.inverse()


def random_matrix(field: PrimeField, k: int, seed: int) -> FieldMatrix:
    """k x k matrix with i.i.d. uniform entries, deterministic in the seed."""
    if k < 1:
        raise ValueError("dimension must be >= 1")
    rng = random.Random(seed)
    p = field.p
    arr = np.array(
        [[rng.randrange(p) for _ in range(k)] for _ in range(k)], dtype=np.uint64
    )
    return FieldMatrix(field, arr)
