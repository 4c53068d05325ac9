"""Rank-honest embedding of multivariate formulas into two variables,
plus the dishonest monomial embedding used as a negative control.

The honest map sends the i-th generator to an iterated commutator with x;
its closed form is the signed binomial sum

    sum_{j=0..n} (-1)^j C(n, j) x^j y x^(n-j)

for the n-th image, which has a formula of size O(n^2) and logarithmic
depth once the powers are balanced.  The exponential nested-commutator
recursion is kept as an independent cross-check oracle.  The monomial map
xi -> x^(i-1) y is a ring embedding but not rank-honest: it collapses the
generic 2x2 matrix to rank one.
"""

from __future__ import annotations

from .field import PrimeField
from .formula import (
    Const,
    Formula,
    Var,
    fadd,
    fmul,
    fsub,
    substitute,
    variables,
)
from .pencil import LinearPencil, PolyMatrix

__all__ = [
    "commutator_image",
    "commutator_image_recursive",
    "embed_formula",
    "embed_pencil",
    "monomial_embed_formula",
    "monomial_embed_pencil",
    "monomial_embed",
]

_X = Var("x")
_Y = Var("y")

_RECURSIVE_LIMIT = 16


def _balanced_power(base: Formula, n: int, field: PrimeField) -> Formula:
    """x^n as a balanced product tree (depth ceil(log2 n))."""
    if n == 0:
        return Const(1)
    if n == 1:
        return base
    half = n // 2
    return fmul(
        field,
        _balanced_power(base, half, field),
        _balanced_power(base, n - half, field),
    )


def commutator_image(n: int, field: PrimeField) -> Formula:
    """Image of the n-th generator under the honest embedding, closed form.

    Binomial coefficients are accumulated mod p by Pascal's rule; for n < p
    (always, at any practical n) none of them collapses to zero spuriously.
    """
    if n < 0:
        raise ValueError("generator index must be >= 0")
    if n == 0:
        return _Y
    coef = 1
    terms = []
    for j in range(n + 1):
        c = field.reduce(coef if j % 2 == 0 else field.neg_one() * coef)
        factors: Formula = _Y
        if j > 0:
            factors = fmul(field, _balanced_power(_X, j, field), factors)
        if n - j > 0:
            factors = fmul(field, factors, _balanced_power(_X, n - j, field))
        terms.append(factors if c == 1 else fmul(field, Const(c), factors))
        coef = coef * (n - j) // (j + 1)
    return _balanced_sum(terms, field)


def _balanced_sum(terms: list[Formula], field: PrimeField) -> Formula:
    if len(terms) == 1:
        return terms[0]
    mid = len(terms) // 2
    return fadd(
        field,
        _balanced_sum(terms[:mid], field),
        _balanced_sum(terms[mid:], field),
    )


def commutator_image_recursive(n: int, field: PrimeField) -> Formula:
    """The literal nested-commutator construction [..[[y,x],x]..,x].

    Size doubles per level, so builds are capped at n <= 16; this exists
    solely to cross-check the closed form.  The recursion shares each level
    internally, so evaluation stays linear in n even though the tree has
    2^n nodes.
    """
    if n < 0:
        raise ValueError("generator index must be >= 0")
    if n > _RECURSIVE_LIMIT:
        raise ValueError(f"recursive construction capped at n <= {_RECURSIVE_LIMIT}")
    img: Formula = _Y
    for _ in range(n):
        img = fsub(field, fmul(field, img, _X), fmul(field, _X, img))
    return img


def _image_map(names: list[str], field: PrimeField, honest: bool) -> dict[str, Formula]:
    mapping: dict[str, Formula] = {}
    for name in names:
        if name in ("x", "y"):
            raise ValueError("formula already uses the bivariate pair x, y")
        idx = int(name[1:])
        # x1..xn are identified with the generators 0..n-1; z-indices are
        # taken as written.
        gen = idx - 1 if name.startswith("x") else idx
        if honest:
            mapping[name] = commutator_image(gen, field)
        else:
            img: Formula = _Y
            if gen > 0:
                img = fmul(field, _balanced_power(_X, gen, field), img)
            mapping[name] = img
    return mapping


def embed_formula(phi: Formula, field: PrimeField) -> Formula:
    """Replace each variable by its honest bivariate image.

    Nonzeroness of the computed rational function is preserved in both
    directions, so identity testing transfers to the image.
    """
    return substitute(phi, _image_map(variables(phi), field, honest=True))


def embed_pencil(pencil: LinearPencil) -> PolyMatrix:
    """Apply the honest embedding entrywise to an affine pencil.

    The image has bivariate polynomial entries and the same noncommutative
    rank as the input.
    """
    f = pencil.field
    mapping = _image_map(pencil.variables, f, honest=True)
    return PolyMatrix(
        f,
        [
            [substitute(pencil.entry(i, j), mapping) for j in range(pencil.cols)]
            for i in range(pencil.rows)
        ],
    )


def monomial_embed_formula(phi: Formula, field: PrimeField) -> Formula:
    """The injective but rank-dishonest map xi -> x^(i-1)*y."""
    return substitute(phi, _image_map(variables(phi), field, honest=False))


def monomial_embed_pencil(pencil: LinearPencil) -> PolyMatrix:
    f = pencil.field
    mapping = _image_map(pencil.variables, f, honest=False)
    return PolyMatrix(
        f,
        [
            [substitute(pencil.entry(i, j), mapping) for j in range(pencil.cols)]
            for i in range(pencil.rows)
        ],
    )


def monomial_embed(obj, field: PrimeField | None = None):
    """Dispatch the dishonest embedding over formulas and pencils."""
    if isinstance(obj, LinearPencil):
        return monomial_embed_pencil(obj)
    if field is None:
        raise ValueError("a field is required to embed a bare formula")
    return monomial_embed_formula(obj, field)
