"""Linear realizations of rational formulas.

A correct formula of size s becomes an invertible pencil M of dimension
O(s) whose inverse has the formula's rational function as its top-right
entry.  Bordering M with unit vectors then yields a pencil that is full
over the free skew field exactly when the function is nonzero, which
reduces rational identity testing to a singularity test.

The gate rules are validated numerically by verify_realization: any sign
or placement error surfaces already at 1x1 (scalar) substitutions, which
the test suite pins down exactly.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .field import PrimeField
from .formula import Const, Formula, Inv, Mul, Var, children, variables
from .oracles import TrialPolicy, evaluate, random_tuple
from .pencil import LinearPencil

__all__ = [
    "realize_formula",
    "singularity_pencil",
    "verify_realization",
    "realization_dimension",
]


def _node_dims(phi: Formula) -> dict[int, int]:
    """Realization dimension of every subformula: leaves take 2, an
    inversion adds 1, a product concatenates, a sum adds 1."""
    dims: dict[int, int] = {}
    order: list[Formula] = []
    stack = [phi]
    while stack:
        node = stack.pop()
        order.append(node)
        stack.extend(children(node))
    for node in reversed(order):
        if isinstance(node, (Var, Const)):
            dims[id(node)] = 2
        elif isinstance(node, Inv):
            dims[id(node)] = dims[id(node.child)] + 1
        elif isinstance(node, Mul):
            dims[id(node)] = dims[id(node.left)] + dims[id(node.right)]
        else:
            dims[id(node)] = dims[id(node.left)] + dims[id(node.right)] + 1
    return dims


def realization_dimension(phi: Formula) -> int:
    """2 * (#leaves) + (#inversion gates) + (#sum gates), counted as a tree."""
    return _node_dims(phi)[id(phi)]


class _PencilBuilder:
    def __init__(self, fld: PrimeField, dim: int):
        self.fld = fld
        self.dim = dim
        self.constant = np.zeros((dim, dim), dtype=np.uint64)
        self.terms: dict[str, np.ndarray] = {}

    def set_leaf(self, i: int, j: int, phi: Formula):
        if isinstance(phi, Var):
            m = self.terms.setdefault(
                phi.name, np.zeros((self.dim, self.dim), dtype=np.uint64)
            )
            m[i, j] = 1
        else:
            self.constant[i, j] = self.fld.reduce(phi.value)

    def set_scalar(self, i: int, j: int, c: int):
        self.constant[i, j] = c % self.fld.p

    def copy_column(self, rows: range, src_col: int, dst_col: int):
        for i in rows:
            self.constant[i, dst_col] = self.constant[i, src_col]
        for m in self.terms.values():
            for i in rows:
                m[i, dst_col] = m[i, src_col]

    def build(self) -> LinearPencil:
        return LinearPencil.build(self.fld, self.dim, self.dim, self.constant, self.terms)


def _emit(builder: _PencilBuilder, phi: Formula, dims: dict[int, int]):
    """Write the realization block of phi at row/column offsets carried on
    an explicit stack (post-order so a sum gate can copy its left child's
    first column once that child is complete).

    Gate rules, with p and q the child dimensions:

      leaf a        ((1, a), (0, -1))                            dim 2
      inverse       ((e_last^T | M_child), (0 | -e_first^T))     dim p+1
      product       ((M_l, -E(last,first)), (0, M_r))            dim p+q
      sum           ((M_l, c1|0.., -e_last^T),
                     (0, M_r, e_last^T), (0, 0, 1))              dim p+q+1
    """
    neg = builder.fld.neg_one()
    stack: list[tuple[Formula, int, int, bool]] = [(phi, 0, 0, False)]
    while stack:
        node, ro, co, done = stack.pop()
        if isinstance(node, (Var, Const)):
            builder.set_scalar(ro, co, 1)
            builder.set_leaf(ro, co + 1, node)
            builder.set_scalar(ro + 1, co + 1, neg)
            continue
        if not done:
            stack.append((node, ro, co, True))
            if isinstance(node, Inv):
                stack.append((node.child, ro, co + 1, False))
            else:
                p = dims[id(node.left)]
                stack.append((node.left, ro, co, False))
                stack.append((node.right, ro + p, co + p, False))
            continue
        if isinstance(node, Inv):
            p = dims[id(node.child)]
            builder.set_scalar(ro + p - 1, co, 1)
            builder.set_scalar(ro + p, co + 1, neg)
        elif isinstance(node, Mul):
            p = dims[id(node.left)]
            builder.set_scalar(ro + p - 1, co + p, neg)
        else:  # Add
            p = dims[id(node.left)]
            q = dims[id(node.right)]
            last = co + p + q
            builder.copy_column(range(ro, ro + p), co, co + p)
            builder.set_scalar(ro + p - 1, last, neg)
            builder.set_scalar(ro + p + q - 1, last, 1)
            builder.set_scalar(ro + p + q, last, 1)


def realize_formula(phi: Formula, fld: PrimeField) -> LinearPencil:
    """Square pencil M, invertible over the skew field for correct phi,
    with the rational function of phi as the top-right entry of M^-1.

    Callers wanting O(log) nesting should depth-reduce first; the
    construction itself accepts any formula shape.  For an incorrect
    formula the pencil is still built, but the invertibility contract is
    void (verify_realization reports inconclusive on an empty domain).
    """
    dims = _node_dims(phi)
    builder = _PencilBuilder(fld, dims[id(phi)])
    _emit(builder, phi, dims)
    return builder.build()


def singularity_pencil(phi: Formula, fld: PrimeField) -> LinearPencil:
    """Border the realization with unit vectors: ((v^T, M), (0, -u)) with
    u = e_first, v = e_last.  Full over the skew field iff the rational
    function of phi is nonzero."""
    m = realize_formula(phi, fld)
    d = m.rows
    fldp = fld.p
    const = np.zeros((d + 1, d + 1), dtype=np.uint64)
    const[:d, 1:] = m.constant
    const[d - 1, 0] = 1
    const[d, 1] = fld.neg_one()
    terms = {}
    for name, arr in m.terms:
        t = np.zeros((d + 1, d + 1), dtype=np.uint64)
        t[:d, 1:] = arr
        terms[name] = t
    return LinearPencil.build(fld, d + 1, d + 1, const, terms)


def verify_realization(
    phi: Formula,
    m: LinearPencil,
    policy: TrialPolicy,
) -> Optional[bool]:
    """Check the inverse contract at sampled tuples.

    Wherever the formula value is defined and the evaluated pencil is
    invertible, the top-right k x k block of the pencil inverse must equal
    the formula value.  Returns True/False, or None when no sampled tuple
    lay in both domains (inconclusive, distinct from failure).
    """
    names = sorted(set(variables(phi)) | set(m.variables))
    dims = policy.dimensions if policy.dimensions else (3,)
    conclusive = False
    for k in dims:
        for t in range(policy.trials):
            tau = random_tuple(policy.field, names, k, policy.trial_seed("realize", k, t))
            out = evaluate(phi, tau, policy.field)
            if not out.defined:
                continue
            big = m.evaluate(tau)
            inv = big.inverse()
            if inv is None:
                continue
            conclusive = True
            top_right = inv.array[:k, -k:]
            if not np.array_equal(top_right, out.value.array):
                return False
    return True if conclusive else None
