"""Matrix-ring evaluation and the randomized zero / correctness /
equivalence oracles.

A formula defines a partial function on tuples of k x k matrices: it is
undefined at a tuple as soon as some inversion gate receives a singular
input.  Sampling such tuples at random over a large prime field gives
one-sided identity tests: a nonzero evaluation is a proof of nonzeroness,
while an all-zero sample is probabilistic evidence of vanishing.  The
default dimension schedule is heuristic (small k already separates
everything seen in practice); the k > 2*size regime that carries the formal
guarantee is available by lifting the cap through the policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

from .field import FieldMatrix, PrimeField, random_matrix
from .formula import (
    Add,
    Const,
    Formula,
    Mul,
    Var,
    children,
    size,
    variables,
)
from .seeding import derive_seed

__all__ = [
    "MatrixTuple",
    "EvalOutcome",
    "TrialPolicy",
    "ZeroVerdict",
    "ZERO",
    "NONZERO",
    "DOMAIN_EMPTY",
    "evaluate",
    "random_tuple",
    "rit_eval",
    "check_correct",
    "equivalent",
]


@dataclass(frozen=True)
class MatrixTuple:
    """An assignment of one k x k matrix over F_p to each variable name."""

    dimension: int
    assignment: dict[str, FieldMatrix]

    def __post_init__(self):
        for name, m in self.assignment.items():
            if m.shape != (self.dimension, self.dimension):
                raise ValueError(f"matrix for {name} is not {self.dimension}-dimensional")

    def field(self) -> PrimeField:
        return next(iter(self.assignment.values())).field


@dataclass(frozen=True)
class EvalOutcome:
    """Defined(value) or UndefinedAt(inversion gate whose input was singular)."""

    value: Optional[FieldMatrix]
    undefined_at: Optional[Formula] = None

    @property
    def defined(self) -> bool:
        return self.value is not None


def random_tuple(
    fld: PrimeField, names: Sequence[str], k: int, seed: int
) -> MatrixTuple:
    """Independent uniform matrices for the given variables, one derived
    seed per variable so the tuple is reproducible."""
    assignment = {
        name: random_matrix(fld, k, derive_seed(seed, "var", name)) for name in names
    }
    return MatrixTuple(k, assignment)


def evaluate(phi: Formula, tau: MatrixTuple, fld: Optional[PrimeField] = None) -> EvalOutcome:
    """Evaluate bottom-up, substituting constants as c*I.

    Traversal is depth-first with the left child first, so the reported
    UndefinedAt gate is deterministic.  Shared subtrees are evaluated once.
    """
    if fld is None:
        if not tau.assignment:
            raise ValueError("cannot infer the field from an empty assignment")
        fld = tau.field()
    k = tau.dimension
    memo: dict[int, FieldMatrix] = {}
    stack: list[Formula] = [phi]
    while stack:
        node = stack[-1]
        nid = id(node)
        if nid in memo:
            stack.pop()
            continue
        if isinstance(node, Var):
            try:
                memo[nid] = tau.assignment[node.name]
            except KeyError:
                raise ValueError(f"unassigned variable {node.name!r}") from None
            stack.pop()
            continue
        if isinstance(node, Const):
            memo[nid] = fld.scalar_matrix(node.value, k)
            stack.pop()
            continue
        ch = children(node)
        missing = [c for c in ch if id(c) not in memo]
        if missing:
            # push right-to-left so the left child is evaluated first
            stack.extend(reversed(missing))
            continue
        stack.pop()
        vals = [memo[id(c)] for c in ch]
        if isinstance(node, Add):
            memo[nid] = vals[0] + vals[1]
        elif isinstance(node, Mul):
            memo[nid] = vals[0] @ vals[1]
        else:  # Inv
            inv = vals[0].inverse()
            if inv is None:
                return EvalOutcome(None, undefined_at=node)
            memo[nid] = inv
    return EvalOutcome(memo[id(phi)])


@dataclass(frozen=True)
class TrialPolicy:
    """Sampling policy for the randomized oracles.

    dimensions: explicit dimension schedule, or None to derive one from the
    formula size: powers of two capped at min(2*size + 1, 64).  With
    guarantee=True the cap is lifted to 2*size + 1, the dimension at which
    nonsingularity of nonzero rational functions holds with high
    probability; verdicts below that cap are labelled heuristic.
    """

    field: PrimeField = dc_field(default_factory=PrimeField)
    dimensions: Optional[tuple[int, ...]] = None
    trials: int = 10
    seed: int = 0
    guarantee: bool = False

    def schedule(self, formula_size: int) -> list[int]:
        if self.dimensions is not None:
            return list(self.dimensions)
        cap = 2 * formula_size + 1 if self.guarantee else min(2 * formula_size + 1, 64)
        dims = []
        k = 2
        while k <= cap:
            dims.append(k)
            k *= 2
        if not dims or (self.guarantee and dims[-1] < cap):
            dims.append(cap)
        return dims

    def trial_seed(self, label: str, dim: int, trial: int) -> int:
        return derive_seed(self.seed, label, dim, trial)


ZERO = "zero"
NONZERO = "nonzero"
DOMAIN_EMPTY = "domain_empty"


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of a randomized zero test.

    Nonzero is exact (the witness re-evaluates to a nonzero matrix); zero
    and domain_empty are probabilistic, with the sampling effort recorded.
    """

    verdict: str
    witnesses_tried: int
    dimension_used: Optional[int] = None
    witness: Optional[MatrixTuple] = None
    heuristic: bool = True
    note: str = ""

    @property
    def is_zero(self) -> bool:
        return self.verdict == ZERO

    @property
    def is_nonzero(self) -> bool:
        return self.verdict == NONZERO


def _regime(policy: TrialPolicy, dims: list[int], formula_size: int) -> tuple[bool, str]:
    """(heuristic?, note).  A zero/empty verdict is labelled heuristic when
    the dimension cap stays below the 2*size bound that carries the formal
    guarantee; either way the per-trial failure bound is recorded (the
    evaluation factors through a pencil determinant of degree at most
    2*size*k, so one defined trial at dimension k errs with probability at
    most 2*size*k/p)."""
    k = dims[-1] if dims else 0
    bound = 2 * formula_size * k / policy.field.p if k else 1.0
    tail = f"per-trial failure probability <= {bound:.3g} at k={k}"
    if dims and k > 2 * formula_size:
        return False, f"schedule reaches the guaranteed k > 2*size regime; {tail}"
    return True, f"heuristic: dimension cap below the 2*size bound; {tail}"


def rit_eval(phi: Formula, policy: TrialPolicy) -> ZeroVerdict:
    """Randomized rational identity test by direct evaluation.

    Returns nonzero the moment some evaluation is defined and differs from
    the zero matrix; zero when every defined evaluation vanished; and
    domain_empty when no sampled tuple was in the domain.
    """
    s = size(phi)
    names = variables(phi)
    dims = policy.schedule(s)
    tried = 0
    zero_seen = 0
    last_defined_dim = None
    for k in dims:
        for t in range(policy.trials):
            tau = random_tuple(policy.field, names, k, policy.trial_seed("rit", k, t))
            tried += 1
            out = evaluate(phi, tau, policy.field)
            if not out.defined:
                continue
            last_defined_dim = k
            if not out.value.is_zero():
                return ZeroVerdict(
                    NONZERO, tried, k, tau, heuristic=False, note="witness found"
                )
            zero_seen += 1
    heuristic, note = _regime(policy, dims, s)
    if zero_seen:
        return ZeroVerdict(ZERO, tried, last_defined_dim, None, heuristic, note)
    return ZeroVerdict(DOMAIN_EMPTY, tried, None, None, heuristic, note)


def check_correct(
    phi: Formula, policy: TrialPolicy
) -> tuple[bool, Optional[MatrixTuple]]:
    """Search for a tuple at which every inversion-gate input is invertible.

    True with a witness proves correctness; False is probabilistic (the
    domain may be nonempty at dimensions the schedule did not reach).
    """
    s = size(phi)
    names = variables(phi)
    for k in policy.schedule(s):
        for t in range(policy.trials):
            tau = random_tuple(policy.field, names, k, policy.trial_seed("correct", k, t))
            if evaluate(phi, tau, policy.field).defined:
                return True, tau
    return False, None


def equivalent(phi1: Formula, phi2: Formula, policy: TrialPolicy) -> ZeroVerdict:
    """Test whether two correct formulas agree wherever both are defined.

    Samples joint tuples; zero means equivalent.  Callers are responsible
    for correctness of the inputs (an incorrect input can only produce
    domain_empty).
    """
    s = max(size(phi1), size(phi2))
    names = sorted(set(variables(phi1)) | set(variables(phi2)))
    tried = 0
    both_seen = 0
    last_dim = None
    for k in policy.schedule(s):
        for t in range(policy.trials):
            tau = random_tuple(policy.field, names, k, policy.trial_seed("equiv", k, t))
            tried += 1
            out1 = evaluate(phi1, tau, policy.field)
            if not out1.defined:
                continue
            out2 = evaluate(phi2, tau, policy.field)
            if not out2.defined:
                continue
            both_seen += 1
            last_dim = k
            if out1.value != out2.value:
                return ZeroVerdict(
                    NONZERO, tried, k, tau, heuristic=False,
                    note="evaluations disagree at the witness",
                )
    heuristic, note = _regime(policy, policy.schedule(s), s)
    if both_seen:
        return ZeroVerdict(ZERO, tried, last_dim, None, heuristic, note)
    return ZeroVerdict(DOMAIN_EMPTY, tried, None, None, heuristic, note)
