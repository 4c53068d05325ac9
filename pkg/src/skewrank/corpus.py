"""Deterministic random corpora: formulas, pencils, polynomial matrices.

Generation is seed-driven and reproducible; rational formulas are
post-checked for correctness (every inversion gate invertible somewhere)
and resampled on failure with a derived retry seed.
"""

from __future__ import annotations

import random
from typing import Optional

from .field import PrimeField
from .formula import Add, Const, Formula, Inv, Mul, Var
from .oracles import TrialPolicy, check_correct
from .pencil import LinearPencil, PolyMatrix
from .seeding import derive_seed

__all__ = [
    "random_formula",
    "random_correct_formula",
    "random_pencil",
    "random_polymatrix",
    "hua_identity",
    "NAMED_ZERO_FORMULAS",
    "NAMED_NONZERO_FORMULAS",
]


def _grow(rng: random.Random, budget: int, nvars: int, p: int, allow_inv: bool) -> Formula:
    if budget <= 1:
        if rng.random() < 0.85:
            return Var(f"x{rng.randrange(1, nvars + 1)}")
        return Const(rng.randrange(1, min(p, 100)))
    if budget == 2 or (allow_inv and rng.random() < 0.18):
        if allow_inv and budget >= 2:
            return Inv(_grow(rng, budget - 1, nvars, p, allow_inv))
    left = rng.randint(1, budget - 2) if budget > 2 else 1
    a = _grow(rng, left, nvars, p, allow_inv)
    b = _grow(rng, budget - 1 - left, nvars, p, allow_inv)
    return Add(a, b) if rng.random() < 0.5 else Mul(a, b)


def random_formula(
    fld: PrimeField, size_budget: int, nvars: int, seed: int, allow_inv: bool = False
) -> Formula:
    """Random formula with about size_budget nodes over x1..x<nvars>."""
    rng = random.Random(seed)
    return _grow(rng, size_budget, nvars, fld.p, allow_inv)


def random_correct_formula(
    fld: PrimeField,
    size_budget: int,
    nvars: int,
    seed: int,
    policy: Optional[TrialPolicy] = None,
    max_attempts: int = 50,
) -> Formula:
    """Random rational formula verified correct by witness search."""
    policy = policy or TrialPolicy(field=fld, dimensions=(2, 4), trials=5, seed=derive_seed(seed, "chk"))
    for attempt in range(max_attempts):
        phi = random_formula(fld, size_budget, nvars, derive_seed(seed, "gen", attempt), allow_inv=True)
        ok, _ = check_correct(phi, policy)
        if ok:
            return phi
    raise RuntimeError(f"no correct formula found in {max_attempts} attempts")


def random_pencil(
    fld: PrimeField, rows: int, cols: int, nvars: int, seed: int, density: float = 0.7
) -> LinearPencil:
    """Random affine pencil over x1..x<nvars> with the given entry density."""
    rng = random.Random(seed)
    import numpy as np

    const = np.zeros((rows, cols), dtype=np.uint64)
    terms = {}
    for i in range(rows):
        for j in range(cols):
            if rng.random() < 0.4:
                const[i, j] = rng.randrange(fld.p)
    for v in range(1, nvars + 1):
        m = np.zeros((rows, cols), dtype=np.uint64)
        any_set = False
        for i in range(rows):
            for j in range(cols):
                if rng.random() < density / 2:
                    m[i, j] = rng.randrange(1, fld.p)
                    any_set = True
        if any_set:
            terms[f"x{v}"] = m
    return LinearPencil.build(fld, rows, cols, const, terms)


def random_polymatrix(
    fld: PrimeField, rows: int, cols: int, entry_size: int, nvars: int, seed: int
) -> PolyMatrix:
    """Matrix of random division-free formulas."""
    entries = [
        [
            random_formula(fld, entry_size, nvars, derive_seed(seed, "entry", i, j))
            for j in range(cols)
        ]
        for i in range(rows)
    ]
    return PolyMatrix(fld, entries)


def hua_identity() -> str:
    """x - (x^-1 + (y^-1 - x)^-1)^-1 - x*y*x, identically zero on its domain."""
    return "x1 - (x1^-1 + (x2^-1 - x1)^-1)^-1 - x1*x2*x1"


NAMED_ZERO_FORMULAS = {
    "hua": hua_identity(),
    "binomial": "(x1 + x2)*(x1 + x2) - x1*x1 - x1*x2 - x2*x1 - x2*x2",
    "shared_domain_pair": "(z1*z2*z3*(z2*z3 - z3*z2)^-1)*(z2*z3 - z3*z2) - z1*z2*z3",
}

NAMED_NONZERO_FORMULAS = {
    "commutator": "x1*x2 - x2*x1",
}
