"""Linear pencils and matrices of formulas.

A linear pencil is A0 + sum_i Ai*xi given by scalar coefficient matrices;
it is the target of every linearization and the input to the blow-up rank
engine.  A PolyMatrix holds arbitrary division-free formulas and sits
between embedding and linearization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FieldMatrix, PrimeField, random_matrix
from .formula import (
    Const,
    Formula,
    Var,
    affine_parts,
    contains_inv,
    fadd,
    fmul,
    is_affine,
    var_sort_key,
)
from .oracles import MatrixTuple, evaluate
from .seeding import derive_seed

__all__ = [
    "LinearPencil",
    "PolyMatrix",
    "pencil_from_affine_matrix",
    "blowup_matrix",
    "polymatrix_blowup_matrix",
]


@dataclass(frozen=True)
class LinearPencil:
    """A0 + sum Ai*xi with all coefficient matrices of one shape.

    `constant` is A0; `terms` maps variable names to their coefficient
    matrices, kept in canonical variable order for deterministic output.
    """

    field: PrimeField
    rows: int
    cols: int
    constant: np.ndarray
    terms: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        if self.constant.shape != (self.rows, self.cols):
            raise ValueError("constant matrix has the wrong shape")
        for name, m in self.terms:
            if m.shape != (self.rows, self.cols):
                raise ValueError(f"coefficient of {name} has the wrong shape")
        names = [name for name, _ in self.terms]
        if names != sorted(names, key=var_sort_key):
            raise ValueError("terms must be in canonical variable order")

    @classmethod
    def build(cls, field: PrimeField, rows: int, cols: int, constant, term_map) -> "LinearPencil":
        const = np.ascontiguousarray(np.asarray(constant, dtype=np.uint64))
        terms = tuple(
            (name, np.ascontiguousarray(np.asarray(term_map[name], dtype=np.uint64)))
            for name in sorted(term_map, key=var_sort_key)
        )
        return cls(field, rows, cols, const, terms)

    @property
    def variables(self) -> list[str]:
        return [name for name, _ in self.terms]

    @property
    def dims(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def entry(self, i: int, j: int) -> Formula:
        """The (i, j) entry as an affine formula."""
        f = self.field
        out: Formula = Const(int(self.constant[i, j]))
        for name, m in self.terms:
            c = int(m[i, j])
            if c:
                out = fadd(f, out, fmul(f, Const(c), Var(name)))
        return out

    def to_polymatrix(self) -> "PolyMatrix":
        return PolyMatrix(
            self.field,
            [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)],
        )

    def evaluate(self, tau: MatrixTuple) -> FieldMatrix:
        """Blow-up substitution of the tuple's matrices for the variables."""
        return blowup_matrix(self, {n: m for n, m in tau.assignment.items()}, tau.dimension)

    def __eq__(self, other):
        if not isinstance(other, LinearPencil):
            return NotImplemented
        return (
            self.field.p == other.field.p
            and self.dims == other.dims
            and np.array_equal(self.constant, other.constant)
            and self.variables == other.variables
            and all(np.array_equal(a, b) for (_, a), (_, b) in zip(self.terms, other.terms))
        )


@dataclass(frozen=True)
class PolyMatrix:
    """Matrix whose entries are formulas (division-free unless noted)."""

    field: PrimeField
    entries: list[list[Formula]]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def dims(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def entry(self, i: int, j: int) -> Formula:
        return self.entries[i][j]

    def is_division_free(self) -> bool:
        return not any(contains_inv(e) for row in self.entries for e in row)

    def variables(self) -> list[str]:
        names: set[str] = set()
        from .formula import variables as fvars

        for row in self.entries:
            for e in row:
                names.update(fvars(e))
        return sorted(names, key=var_sort_key)

    def evaluate(self, tau: MatrixTuple, fld: PrimeField | None = None) -> FieldMatrix | None:
        """Entrywise block evaluation; None when some entry is undefined."""
        fld = fld or self.field
        k = tau.dimension
        big = fld.zeros(self.rows * k, self.cols * k)
        arr = big.array
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out = evaluate(e, tau, fld)
                if not out.defined:
                    return None
                arr[i * k : (i + 1) * k, j * k : (j + 1) * k] = out.value.array
        return big


def pencil_from_affine_matrix(m: PolyMatrix) -> LinearPencil:
    """Convert a matrix of affine formulas into coefficient form."""
    f = m.field
    rows, cols = m.dims
    if not all(is_affine(e) for row in m.entries for e in row):
        raise ValueError("matrix entries are not all affine")
    const = np.zeros((rows, cols), dtype=np.uint64)
    term_map: dict[str, np.ndarray] = {}
    for i in range(rows):
        for j in range(cols):
            c0, coefs = affine_parts(f, m.entries[i][j])
            const[i, j] = c0
            for name, c in coefs.items():
                if name not in term_map:
                    term_map[name] = np.zeros((rows, cols), dtype=np.uint64)
                term_map[name][i, j] = c
    return LinearPencil.build(f, rows, cols, const, term_map)


def blowup_matrix(
    pencil: LinearPencil, assignment: dict[str, FieldMatrix], k: int
) -> FieldMatrix:
    """The (rows*k) x (cols*k) scalar matrix obtained by substituting the
    given k x k matrices for the variables."""
    f = pencil.field
    p = np.uint64(f.p)
    out = np.zeros((pencil.rows * k, pencil.cols * k), dtype=np.uint64)
    eye = np.zeros((k, k), dtype=np.uint64)
    np.fill_diagonal(eye, 1 % f.p)
    for r, c in zip(*np.nonzero(pencil.constant)):
        blk = out[r * k : (r + 1) * k, c * k : (c + 1) * k]
        blk[...] = (blk + int(pencil.constant[r, c]) * eye) % p
    for name, coeff in pencil.terms:
        m = assignment[name]
        for r, c in zip(*np.nonzero(coeff)):
            blk = out[r * k : (r + 1) * k, c * k : (c + 1) * k]
            blk[...] = (blk + m.scale(int(coeff[r, c])).array) % p
    return FieldMatrix(f, out)


def polymatrix_blowup_matrix(
    m: PolyMatrix, k: int, seed: int, fld: PrimeField | None = None
) -> FieldMatrix | None:
    """Evaluate the matrix at an independent uniform k x k tuple."""
    fld = fld or m.field
    names = m.variables()
    tau = MatrixTuple(
        k, {n: random_matrix(fld, k, derive_seed(seed, "var", n)) for n in names}
    )
    return m.evaluate(tau, fld)
