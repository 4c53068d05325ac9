"""Higman linearization with verifiable certificates.

Repeatedly rewrites a matrix entry f + g*h into the enlarged block
((f, g), (-h, 1)) by one elementary row and one elementary column
operation, pushing the product down until every entry is affine.  The
accumulated operations P (upper triangular, unit diagonal) and Q (lower
triangular, unit diagonal) witness P (A + I_k) Q = L exactly, where k is
the number of expansion steps, so ncrk(A) + k = ncrk(L).  Recursion stops
at affine entries, not single leaves, which keeps k at the number of
essential product gates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .field import PrimeField
from .formula import (
    Add,
    Const,
    Formula,
    Mul,
    affine_parts,
    contains_inv,
    fmul,
    fneg,
    fprod,
    fsum,
    is_affine,
    is_constant_formula,
)
from .oracles import TrialPolicy, random_tuple
from .pencil import LinearPencil, PolyMatrix, pencil_from_affine_matrix
from .seeding import derive_seed

__all__ = [
    "HigmanCertificate",
    "linearize_formula",
    "linearize_polymatrix",
    "verify_certificate",
]


@dataclass(frozen=True)
class HigmanCertificate:
    """(P, Q, L, k) with P (A + I_k) Q = L.

    P is (rows+k)-square upper triangular with unit diagonal, Q is
    (cols+k)-square lower triangular with unit diagonal, L is an affine
    pencil of shape (rows+k) x (cols+k); the identity holds as an exact
    polynomial identity and is spot-checked by evaluation.
    """

    p_matrix: PolyMatrix
    q_matrix: PolyMatrix
    pencil: LinearPencil
    padding: int
    original_dims: tuple[int, int]

    @property
    def k(self) -> int:
        return self.padding


def _flatten_terms(phi: Formula) -> list[Formula]:
    """Leaves of the top-level addition tree, left to right."""
    out: list[Formula] = []
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Add):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def _flatten_factors(phi: Formula) -> list[Formula]:
    """Leaves of the top-level multiplication tree, left to right."""
    out: list[Formula] = []
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Mul):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def _normalized_terms(fld: PrimeField, phi: Formula) -> list[Formula]:
    """Rewrite as a term list in which every non-affine term is a product
    of two non-constant parts.

    Scalar factors are central, so they fold into one coefficient; a lone
    scalar times a sum distributes over the sum.  Both rewrites are exact
    ring identities, and they guarantee that each expansion step of the
    linearization makes progress.
    """
    result: list[Formula] = []
    queue = list(reversed(_flatten_terms(phi)))
    while queue:
        t = queue.pop()
        if is_affine(t):
            result.append(t)
            continue
        coef = 1
        nonconst: list[Formula] = []
        for f in _flatten_factors(t):
            if is_constant_formula(f):
                value, _ = affine_parts(fld, f)
                coef = fld.reduce(coef * value)
            else:
                nonconst.append(f)
        if coef == 0:
            continue
        if len(nonconst) == 1:
            g = nonconst[0]
            if is_affine(g):
                result.append(fmul(fld, Const(coef), g))
            else:
                # g is an addition subtree; distribute the scalar
                for sub in reversed(_flatten_terms(g)):
                    queue.append(fmul(fld, Const(coef), sub))
            continue
        head = fmul(fld, Const(coef), nonconst[0])
        result.append(fprod(fld, [head] + nonconst[1:]))
    return result


def _split_product(fld: PrimeField, phi: Formula):
    """Write the entry as f + g*h with g, h non-constant, or return None
    when normalization reveals the entry to be affine after all."""
    terms = _normalized_terms(fld, phi)
    pos = next((i for i, t in enumerate(terms) if not is_affine(t)), None)
    if pos is None:
        return fsum(fld, terms), None, None
    prod = terms[pos]
    rest = terms[:pos] + terms[pos + 1 :]
    f = fsum(fld, rest) if rest else Const(0)
    return f, prod.left, prod.right


def linearize_polymatrix(a: PolyMatrix) -> HigmanCertificate:
    """Linearize every entry of a division-free matrix of formulas."""
    fld = a.field
    if not a.is_division_free():
        raise ValueError("matrix entries must be division-free")
    rows, cols = a.dims
    m = [list(row) for row in a.entries]
    p_rows = [[Const(1) if i == j else Const(0) for j in range(rows)] for i in range(rows)]
    q_rows = [[Const(1) if i == j else Const(0) for j in range(cols)] for i in range(cols)]

    def grow(mat, n):
        for row in mat:
            row.append(Const(0))
        mat.append([Const(0)] * n + [Const(1)])

    # Process each original entry to completion (LIFO), so the expansion
    # blocks of one entry stay contiguous.
    stack = [(i, j) for i in range(rows) for j in range(cols) if not is_affine(m[i][j])]
    stack.reverse()
    k = 0
    while stack:
        r, c = stack.pop()
        entry = m[r][c]
        if is_affine(entry):
            continue
        f, g, h = _split_product(fld, entry)
        if g is None:
            m[r][c] = f  # affine once scalars were folded through
            continue
        neg_h = fneg(fld, h)
        k += 1
        mr, mc = rows + k - 1, cols + k - 1
        grow(m, mc)
        grow(p_rows, rows + k - 1)
        grow(q_rows, cols + k - 1)
        m[r][c] = f
        m[r][mc] = g
        m[mr][c] = neg_h
        p_rows[r][rows + k - 1] = g
        q_rows[cols + k - 1][c] = neg_h
        stack.extend([(r, c), (r, mc), (mr, c)])

    return HigmanCertificate(
        p_matrix=PolyMatrix(fld, p_rows),
        q_matrix=PolyMatrix(fld, q_rows),
        pencil=pencil_from_affine_matrix(PolyMatrix(fld, m)),
        padding=k,
        original_dims=(rows, cols),
    )


def linearize_formula(phi: Formula, fld: PrimeField) -> HigmanCertificate:
    """Certificate for the 1x1 matrix [phi]."""
    if contains_inv(phi):
        raise ValueError("formula contains an inversion gate")
    return linearize_polymatrix(PolyMatrix(fld, [[phi]]))


def _is_const_val(phi: Formula, value: int) -> bool:
    return isinstance(phi, Const) and phi.value == value


def _triangular_ok(m: PolyMatrix, upper: bool) -> bool:
    n = m.rows
    if m.cols != n:
        return False
    for i in range(n):
        for j in range(n):
            e = m.entry(i, j)
            if i == j:
                if not _is_const_val(e, 1):
                    return False
            elif (i > j) if upper else (i < j):
                if not _is_const_val(e, 0):
                    return False
    return True


def _padded(a: PolyMatrix, k: int) -> PolyMatrix:
    """A + I_k (block diagonal)."""
    rows, cols = a.dims
    out = [
        [a.entry(i, j) if i < rows and j < cols else Const(0) for j in range(cols + k)]
        for i in range(rows + k)
    ]
    for t in range(k):
        out[rows + t][cols + t] = Const(1)
    return PolyMatrix(a.field, out)


def verify_certificate(
    cert: HigmanCertificate, a: PolyMatrix, policy: TrialPolicy
) -> bool:
    """Structural checks (exact) plus the identity P (A + I_k) Q = L at
    policy.trials random tuples."""
    rows, cols = a.dims
    k = cert.padding
    if cert.original_dims != (rows, cols):
        raise ValueError("certificate dimensions do not match the matrix")
    if cert.pencil.dims != (rows + k, cols + k):
        raise ValueError("pencil dimensions do not match dims + padding")
    if not _triangular_ok(cert.p_matrix, upper=True):
        return False
    if not _triangular_ok(cert.q_matrix, upper=False):
        return False
    for mat in (cert.p_matrix, cert.q_matrix):
        if not mat.is_division_free():
            return False
    fld = a.field
    names = sorted(
        set(a.variables()) | set(cert.pencil.variables),
        key=lambda s: (len(s), s),
    )
    padded = _padded(a, k)
    dim = policy.dimensions[0] if policy.dimensions else 3
    for t in range(policy.trials):
        tau = random_tuple(fld, names, dim, derive_seed(policy.seed, "higman", t))
        pv = cert.p_matrix.evaluate(tau, fld)
        qv = cert.q_matrix.evaluate(tau, fld)
        av = padded.evaluate(tau, fld)
        lv = cert.pencil.evaluate(tau)
        if pv is None or qv is None or av is None:
            return False
        if (pv @ av) @ qv != lv:
            return False
    return True
