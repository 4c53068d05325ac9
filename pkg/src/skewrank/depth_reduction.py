"""Formula depth reduction.

Two algorithms live here.  The division-free one repeatedly splits at a
gate of balanced weight and recombines the four pieces with two products
and one sum, giving depth O(log size) unconditionally.  The rational one
(inversion gates allowed) additionally maintains z-normal forms
(A*z + B)*(C*z + D)^-1 along root-to-leaf paths; whether certain
subformulas vanish changes the construction, so it consults a rational
identity testing oracle.  Oracles are pluggable: the default evaluates at
random matrix tuples, and the rank-based routes are provided by the rank
module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

from .field import PrimeField
from .formula import (
    Add,
    Const,
    Formula,
    Inv,
    Mul,
    NoSplitterError,
    Var,
    children,
    collapse_affine,
    contains_inv,
    fadd,
    find_splitter,
    finv,
    fmul,
    fresh_var,
    heavy_split_gate,
    node_at_path,
    occurrences,
    path_to_unique_var,
    replace_at_path,
    simplify,
    size,
    variables,
    weights,
)
from .oracles import TrialPolicy, check_correct, evaluate, random_tuple, rit_eval
from .seeding import derive_seed

__all__ = [
    "RitOracle",
    "EvalOracle",
    "OracleInconsistencyError",
    "ZNormalForm",
    "depth_reduce_polynomial",
    "depth_reduce_rational",
    "normal_form",
    "DEPTH_REDUCE_BASE_SIZE",
    "C_POLY",
    "C_RAT",
    "B_RAT",
]

# Published depth-bound constants, asserted by the test suite:
# division-free outputs satisfy depth <= C_POLY * log2(size); rational
# outputs and normal-form parts satisfy depth <= C_RAT * log2(size) + B_RAT.
C_POLY = 6
C_RAT = 12
B_RAT = 8

# below this size the recursions return their input unchanged
DEPTH_REDUCE_BASE_SIZE = 9


class OracleInconsistencyError(RuntimeError):
    """The zero-test oracle contradicted itself downstream (a denominator it
    implied nonzero evaluates to the zero function)."""

    def __init__(self, message: str, subformula: Formula):
        super().__init__(message)
        self.subformula = subformula


class RitOracle(Protocol):
    def is_zero(self, phi: Formula) -> bool: ...


@dataclass(frozen=True)
class EvalOracle:
    """Zero test by direct randomized evaluation (the default route)."""

    policy: TrialPolicy

    def is_zero(self, phi: Formula) -> bool:
        return rit_eval(phi, self.policy).verdict != "nonzero"


def _default_oracle(fld: PrimeField) -> EvalOracle:
    return EvalOracle(TrialPolicy(field=fld))


def _split_gate(phi: Formula):
    try:
        return find_splitter(phi)
    except NoSplitterError:
        # The [s/3, 2s/3) window can be empty for some node counts; the
        # heavy-path gate still shrinks both pieces geometrically.
        return heavy_split_gate(phi)


# ---------------------------------------------------------------------------
# division-free depth reduction
# ---------------------------------------------------------------------------

def depth_reduce_polynomial(phi: Formula, fld: PrimeField) -> Formula:
    """Equivalent division-free formula of depth <= C_POLY * log2(size).

    Split at a balanced gate v; the polynomial then factors through the
    root-to-v path as psi1 * phi_v * psi2 + psi3, where psi1 collects the
    left-side product siblings in path order, psi2 the right-side ones
    deepest first, and psi3 is the formula with phi_v zeroed out.  All four
    pieces are reduced recursively and recombined.
    """
    if contains_inv(phi):
        raise ValueError("formula contains an inversion gate")
    return _dr_poly(phi, fld)


def _dr_poly(phi: Formula, fld: PrimeField) -> Formula:
    if size(phi) < DEPTH_REDUCE_BASE_SIZE:
        return phi
    v, path = _split_gate(phi)
    left_factors, right_factors = _path_products(phi, path)
    core = _dr_poly(v, fld)
    if left_factors is not None:
        core = fmul(fld, _dr_poly(left_factors, fld), core)
    if right_factors is not None:
        core = fmul(fld, core, _dr_poly(right_factors, fld))
    remainder = simplify(fld, replace_at_path(phi, path, Const(0)))
    if not (isinstance(remainder, Const) and remainder.value == 0):
        core = fadd(fld, core, _dr_poly(remainder, fld))
    return core


def _path_products(phi: Formula, path: tuple[int, ...]):
    """(psi1, psi2): products of the multiplication siblings along the path.

    A sibling hanging off a Mul gate whose path child is on the right
    multiplies from the left (collected in path order); one whose path
    child is on the left multiplies from the right (collected deepest
    first).  That order is forced by noncommutativity.
    """
    left: list[Formula] = []
    right: list[Formula] = []
    node = phi
    for idx in path:
        ch = children(node)
        if isinstance(node, Mul):
            if idx == 1:
                left.append(ch[0])
            else:
                right.append(ch[1])
        node = ch[idx]
    right.reverse()
    return _product_or_none(left), _product_or_none(right)


def _product_or_none(factors: list[Formula]) -> Optional[Formula]:
    if not factors:
        return None
    out = factors[0]
    for f in factors[1:]:
        out = Mul(out, f)
    return out


# ---------------------------------------------------------------------------
# z-normal forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZNormalForm:
    """(a*z + b) * (c*z + d)^-1 with a, b, c, d free of z."""

    a: Formula
    b: Formula
    c: Formula
    d: Formula

    def parts(self) -> tuple[Formula, Formula, Formula, Formula]:
        return (self.a, self.b, self.c, self.d)

    def as_formula(self, z: str, fld: PrimeField) -> Formula:
        return self.apply(Var(z), fld)

    def apply(self, psi: Formula, fld: PrimeField) -> Formula:
        """Substitute psi for z: (a*psi + b) * (c*psi + d)^-1."""
        num = fadd(fld, fmul(fld, self.a, psi), self.b)
        den = fadd(fld, fmul(fld, self.c, psi), self.d)
        return fmul(fld, num, finv(fld, den))

    def denominator_at(self, psi: Formula, fld: PrimeField) -> Formula:
        return fadd(fld, fmul(fld, self.c, psi), self.d)


def _nf_clean(fld: PrimeField, nf: ZNormalForm) -> ZNormalForm:
    return ZNormalForm(*(collapse_affine(fld, x) for x in nf.parts()))


def mobius_compose(fld: PrimeField, n1: ZNormalForm, n2: ZNormalForm) -> ZNormalForm:
    """Composition of normal forms along a path: exactly the 2x2 matrix
    product [[a1,b1],[c1,d1]] * [[a2,b2],[c2,d2]]."""
    a1, b1, c1, d1 = n1.parts()
    a2, b2, c2, d2 = n2.parts()
    return ZNormalForm(
        fadd(fld, fmul(fld, a1, a2), fmul(fld, b1, c2)),
        fadd(fld, fmul(fld, a1, b2), fmul(fld, b1, d2)),
        fadd(fld, fmul(fld, c1, a2), fmul(fld, d1, c2)),
        fadd(fld, fmul(fld, c1, b2), fmul(fld, d1, d2)),
    )


def normal_form(
    phi: Formula,
    z: str,
    fld: PrimeField,
    oracle: Optional[RitOracle] = None,
) -> ZNormalForm:
    """Normal form (a*z + b)*(c*z + d)^-1 equivalent to phi, in which z
    occurs at most once and a..d have depth O(log size).

    For any substitution pi that keeps phi correct, c*pi + d is a nonzero
    rational function, which is what makes splicing a reduced subformula
    back in safe.
    """
    if oracle is None:
        oracle = _default_oracle(fld)
    occ = occurrences(phi, z)
    if occ > 1:
        raise ValueError(f"variable {z} occurs {occ} times, expected at most once")
    return _nf_any(phi, z, fld, oracle)


def _nf_any(phi: Formula, z: str, fld: PrimeField, oracle: RitOracle) -> ZNormalForm:
    """Dispatch on whether z still occurs (pruning a vanishing branch can
    absorb the z occurrence, leaving a formula constant in z)."""
    if occurrences(phi, z) == 0:
        return ZNormalForm(Const(0), _dr_rational(phi, fld, oracle), Const(0), Const(1))
    return _nf(phi, z, fld, oracle)


def _nf(phi: Formula, z: str, fld: PrimeField, oracle: RitOracle) -> ZNormalForm:
    s = size(phi)
    if s < DEPTH_REDUCE_BASE_SIZE:
        return _nf_direct(phi, z, fld, oracle)
    path = path_to_unique_var(phi, z)
    w = weights(phi)

    # Case 1: a balanced gate on the path (weight within [s/6+1, 5s/6]).
    node = phi
    for i, idx in enumerate(path):
        node = children(node)[idx]
        wt = w[id(node)]
        if 6 * wt <= 5 * s and 6 * (s - wt + 1) <= 5 * s:
            zp = fresh_var(phi)
            outer = _nf(replace_at_path(phi, path[: i + 1], Var(zp)), zp, fld, oracle)
            inner = _nf(node, z, fld, oracle)
            return _nf_clean(fld, mobius_compose(fld, outer, inner))

    # Case 2: no balanced gate; locate the unique heavy sibling.
    heavies = []
    node = phi
    for i, idx in enumerate(path):
        ch = children(node)
        if len(ch) == 2:
            sib = ch[1 - idx]
            if 6 * w[id(sib)] > s:
                heavies.append((i, idx, node, sib))
        node = ch[idx]
    if len(heavies) != 1:
        # the two cases are exhaustive up to integer edge effects; fall
        # back to the structural walk
        return _nf_direct(phi, z, fld, oracle)
    i, idx, parent, sib = heavies[0]
    parent_path = path[:i]
    reduced_sib = _dr_rational(sib, fld, oracle)
    if oracle.is_zero(reduced_sib):
        pruned = replace_at_path(phi, parent_path + (1 - idx,), Const(0))
        return _nf_any(simplify(fld, pruned, collapse=False), z, fld, oracle)
    zp = fresh_var(phi)
    outer = _nf(replace_at_path(phi, parent_path, Var(zp)), zp, fld, oracle)
    inner = _nf(node_at_path(phi, parent_path + (idx,)), z, fld, oracle)
    a2, b2, c2, d2 = inner.parts()
    t = reduced_sib
    if isinstance(parent, Add):
        # phi_parent = t + inner  (addition commutes with the sibling side)
        inner2 = ZNormalForm(
            fadd(fld, a2, fmul(fld, t, c2)), fadd(fld, b2, fmul(fld, t, d2)), c2, d2
        )
    elif idx == 1:
        # parent is Mul, z-branch on the right: phi_parent = t * inner
        inner2 = ZNormalForm(fmul(fld, t, a2), fmul(fld, t, b2), c2, d2)
    else:
        # parent is Mul, z-branch on the left: phi_parent = inner * t
        ti = finv(fld, t)
        inner2 = ZNormalForm(a2, b2, fmul(fld, ti, c2), fmul(fld, ti, d2))
    return _nf_clean(fld, mobius_compose(fld, outer, inner2))


def _nf_direct(phi: Formula, z: str, fld: PrimeField, oracle: RitOracle) -> ZNormalForm:
    """Structural normal form: walk from the z leaf back to the root,
    updating (a, b, c, d) one gate at a time.  Linear depth, used as the
    recursion base."""
    path = path_to_unique_var(phi, z)
    spine = [phi]
    for idx in path:
        spine.append(children(spine[-1])[idx])
    nf = ZNormalForm(Const(1), Const(0), Const(0), Const(1))
    for parent, idx in zip(reversed(spine[:-1]), reversed(path)):
        a, b, c, d = nf.parts()
        if isinstance(parent, Inv):
            nf = ZNormalForm(c, d, a, b)
            continue
        sib = children(parent)[1 - idx]
        if isinstance(parent, Add):
            nf = ZNormalForm(
                fadd(fld, a, fmul(fld, sib, c)), fadd(fld, b, fmul(fld, sib, d)), c, d
            )
        elif idx == 1:  # Mul, z-branch right
            nf = ZNormalForm(fmul(fld, sib, a), fmul(fld, sib, b), c, d)
        else:  # Mul, z-branch left: needs the sibling inverse, or vanishes
            if oracle.is_zero(sib):
                nf = ZNormalForm(Const(0), Const(0), Const(0), Const(1))
            else:
                si = finv(fld, sib)
                nf = ZNormalForm(a, b, fmul(fld, si, c), fmul(fld, si, d))
    return _nf_clean(fld, nf)


# ---------------------------------------------------------------------------
# rational depth reduction
# ---------------------------------------------------------------------------

def depth_reduce_rational(
    phi: Formula,
    fld: PrimeField,
    oracle: Optional[RitOracle] = None,
) -> Formula:
    """Equivalent correct formula of depth <= C_RAT * log2(size) + B_RAT.

    Splits at a balanced gate v, reduces phi_v, normal-forms the context
    phi with v replaced by a fresh variable, and splices the reduced piece
    back in.  The caller is responsible for phi being correct.  A zero-test
    oracle that misreports a vanishing sibling as nonzero leaves an
    identically singular inversion in the output; that is detected by an
    independent witness search and raised as OracleInconsistencyError with
    the offending inversion input attached.
    """
    if oracle is None:
        oracle = _default_oracle(fld)
    out = _dr_rational(phi, fld, oracle)
    if out is phi:
        return out
    probe = TrialPolicy(
        field=fld, dimensions=(2, 4), trials=4, seed=derive_seed(0xD3, "dr-verify")
    )
    ok_in, _ = check_correct(phi, probe)
    if ok_in and not check_correct(out, probe)[0]:
        names = variables(out)
        gate = out
        for t in range(probe.trials):
            tau = random_tuple(fld, names, 4, probe.trial_seed("blame", 4, t))
            result = evaluate(out, tau, fld)
            if not result.defined:
                gate = result.undefined_at.child
                break
        raise OracleInconsistencyError(
            "oracle-declared-nonzero inversion input evaluates as zero downstream",
            gate,
        )
    return out


def _dr_rational(phi: Formula, fld: PrimeField, oracle: RitOracle) -> Formula:
    if size(phi) < DEPTH_REDUCE_BASE_SIZE:
        return phi
    v, path = _split_gate(phi)
    psi = _dr_rational(v, fld, oracle)
    zname = fresh_var(phi)
    nf = _nf(replace_at_path(phi, path, Var(zname)), zname, fld, oracle)
    return nf.apply(psi, fld)
