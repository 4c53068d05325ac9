"""Noncommutative rational formulas: representation, parsing, printing,
metrics and structural transformations.

A formula is a rooted binary tree of Add / Mul gates, unary Inv gates,
variables and field constants.  Multiplication is ordered (left to right);
subtraction and unary minus are parser sugar for multiplication by p - 1.
Subtrees may be shared internally to save memory, but every algorithm in
the package treats formulas as trees (fan-out one): sizes, depths and gate
positions are always counted with multiplicity.  Traversals are iterative
so deeply nested formulas do not hit the interpreter recursion limit.
"""

from __future__ import annotations

import re
from typing import Callable, Iterable, Optional

from .field import PrimeField

__all__ = [
    "Formula",
    "Var",
    "Const",
    "Add",
    "Mul",
    "Inv",
    "ParseError",
    "NoSplitterError",
    "parse_formula",
    "format_formula",
    "children",
    "fold",
    "size",
    "depth",
    "weights",
    "metrics",
    "variables",
    "occurrences",
    "contains_inv",
    "structural_equal",
    "substitute",
    "replace_at_path",
    "node_at_path",
    "path_to_unique_var",
    "find_splitter",
    "heavy_split_gate",
    "fadd",
    "fmul",
    "finv",
    "fneg",
    "fsub",
    "fprod",
    "fsum",
    "is_affine",
    "is_constant_formula",
    "affine_parts",
    "collapse_affine",
    "simplify",
    "var_sort_key",
    "fresh_var",
]


class Formula:
    __slots__ = ()

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return structural_equal(self, other)

    __hash__ = None  # identity-keyed dicts use id(); structural eq above

    def __repr__(self):
        return format_formula(self)


class Var(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name


class Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value


class Add(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right


class Mul(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right


class Inv(Formula):
    __slots__ = ("child",)

    def __init__(self, child: Formula):
        self.child = child


def children(node: Formula) -> tuple:
    if isinstance(node, (Add, Mul)):
        return (node.left, node.right)
    if isinstance(node, Inv):
        return (node.child,)
    return ()


def _with_children(node: Formula, ch: list) -> Formula:
    if isinstance(node, Add):
        return Add(ch[0], ch[1])
    if isinstance(node, Mul):
        return Mul(ch[0], ch[1])
    if isinstance(node, Inv):
        return Inv(ch[0])
    return node


# ---------------------------------------------------------------------------
# generic iterative post-order fold with sharing-aware memoization
# ---------------------------------------------------------------------------

def fold(phi: Formula, fn: Callable[[Formula, list], object]):
    """Reduce the formula bottom-up.  fn(node, child_values) -> value.

    Each structurally shared node is reduced once; because fn must be a pure
    function of the node and its children's values, the result is identical
    to the tree-shaped computation.
    """
    memo: dict[int, object] = {}
    stack: list[Formula] = [phi]
    while stack:
        node = stack[-1]
        nid = id(node)
        if nid in memo:
            stack.pop()
            continue
        missing = [c for c in children(node) if id(c) not in memo]
        if missing:
            stack.extend(missing)
            continue
        stack.pop()
        memo[nid] = fn(node, [memo[id(c)] for c in children(node)])
    return memo[id(phi)]


def size(phi: Formula) -> int:
    """Total node count (leaves and gates), with multiplicity."""
    return fold(phi, lambda n, ch: 1 + sum(ch))


def depth(phi: Formula) -> int:
    """Longest root-to-leaf edge count."""
    return fold(phi, lambda n, ch: 1 + max(ch) if ch else 0)


def weights(phi: Formula) -> dict[int, int]:
    """Subtree node count for every node, keyed by id(node)."""
    w: dict[int, int] = {}

    def fn(node, ch):
        v = 1 + sum(ch)
        w[id(node)] = v
        return v

    fold(phi, fn)
    return w


def metrics(phi: Formula) -> tuple[int, int, dict[int, int]]:
    """(size, depth, weights) in one pass."""
    w = weights(phi)
    return w[id(phi)], depth(phi), w


def variables(phi: Formula) -> list[str]:
    """Sorted list of variable names appearing in the formula."""
    names: set[str] = set()
    fold(phi, lambda n, ch: names.add(n.name) if isinstance(n, Var) else None)
    return sorted(names, key=var_sort_key)


def occurrences(phi: Formula, name: str) -> int:
    """Number of tree positions labelled by the variable (with multiplicity)."""
    return fold(
        phi,
        lambda n, ch: (1 if isinstance(n, Var) and n.name == name else 0) + sum(ch),
    )


def contains_inv(phi: Formula) -> bool:
    return fold(phi, lambda n, ch: isinstance(n, Inv) or any(ch))


def structural_equal(a: Formula, b: Formula) -> bool:
    stack = [(a, b)]
    seen: set[tuple[int, int]] = set()
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        key = (id(x), id(y))
        if key in seen:
            continue
        seen.add(key)
        if type(x) is not type(y):
            return False
        if isinstance(x, Var):
            if x.name != y.name:
                return False
        elif isinstance(x, Const):
            if x.value != y.value:
                return False
        else:
            stack.extend(zip(children(x), children(y)))
    return True


def substitute(phi: Formula, mapping: dict[str, Formula]) -> Formula:
    """Replace every occurrence of the mapped variables by the given formulas.

    Shared subtrees are rewritten once, so the substituted images are shared
    across leaves.
    """

    def fn(node, ch):
        if isinstance(node, Var) and node.name in mapping:
            return mapping[node.name]
        if not ch or all(c is old for c, old in zip(ch, children(node))):
            return node
        return _with_children(node, ch)

    return fold(phi, fn)


# ---------------------------------------------------------------------------
# tree positions
# ---------------------------------------------------------------------------
# A path is a tuple of child indices from the root; it identifies a tree
# position even when the underlying objects are shared.

def node_at_path(phi: Formula, path: tuple[int, ...]) -> Formula:
    node = phi
    for i in path:
        node = children(node)[i]
    return node


def replace_at_path(phi: Formula, path: tuple[int, ...], replacement: Formula) -> Formula:
    """Rebuild the formula with the subtree at the given position replaced."""
    spine = [phi]
    for i in path:
        spine.append(children(spine[-1])[i])
    node = replacement
    for parent, i in zip(reversed(spine[:-1]), reversed(path)):
        ch = list(children(parent))
        ch[i] = node
        node = _with_children(parent, ch)
    return node


def path_to_unique_var(phi: Formula, name: str) -> tuple[int, ...]:
    """Path to the single occurrence of a variable (which must occur once)."""
    occ = {}

    def fn(node, ch):
        c = (1 if isinstance(node, Var) and node.name == name else 0) + sum(ch)
        occ[id(node)] = c
        return c

    total = fold(phi, fn)
    if total != 1:
        raise ValueError(f"variable {name} occurs {total} times, expected exactly once")
    path = []
    node = phi
    while not (isinstance(node, Var) and node.name == name):
        for i, c in enumerate(children(node)):
            if occ[id(c)] > 0:
                path.append(i)
                node = c
                break
    return tuple(path)


# ---------------------------------------------------------------------------
# splitter search for depth reduction
# ---------------------------------------------------------------------------

class NoSplitterError(ValueError):
    pass


def find_splitter(
    phi: Formula, *, window_size: Optional[int] = None, min_size: int = 9
) -> tuple[Formula, tuple[int, ...]]:
    """First gate (in preorder) whose subtree weight w satisfies
    s/3 <= w < 2s/3, together with its tree position.

    Subtrees too light to contain a candidate are pruned, so the scan stays
    linear even though positions are enumerated with multiplicity.
    """
    w = weights(phi)
    s = window_size if window_size is not None else w[id(phi)]
    if window_size is None and s < min_size:
        raise NoSplitterError(f"formula of size {s} is below the splitter threshold")
    stack: list[tuple[Formula, tuple[int, ...]]] = [(phi, ())]
    while stack:
        node, path = stack.pop()
        wt = w[id(node)]
        if 3 * wt < s:
            continue
        if 3 * wt >= s and 3 * wt < 2 * s:
            return node, path
        ch = children(node)
        for i in range(len(ch) - 1, -1, -1):
            stack.append((ch[i], path + (i,)))
    raise NoSplitterError(f"no gate with weight in [s/3, 2s/3) for s={s}")


def heavy_split_gate(phi: Formula) -> tuple[Formula, tuple[int, ...]]:
    """Fallback split point when the strict window is empty: walk the heavy
    path from the root and return the first gate with weight <= 2s/3.

    Such a gate always exists and its weight is at least floor(s/3), so both
    recursion pieces still shrink geometrically.
    """
    w = weights(phi)
    s = w[id(phi)]
    node, path = phi, ()
    while 3 * w[id(node)] >= 2 * s:
        ch = children(node)
        if not ch:
            break
        i = max(range(len(ch)), key=lambda j: (w[id(ch[j])], -j))
        node, path = ch[i], path + (i,)
    return node, path


# ---------------------------------------------------------------------------
# constructors with constant folding
# ---------------------------------------------------------------------------

def _is_const(phi: Formula, value: Optional[int] = None) -> bool:
    return isinstance(phi, Const) and (value is None or phi.value == value)


def fadd(field: PrimeField, a: Formula, b: Formula) -> Formula:
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(field.reduce(a.value + b.value))
    return Add(a, b)


def fmul(field: PrimeField, a: Formula, b: Formula) -> Formula:
    if _is_const(a, 0) or _is_const(b, 0):
        return Const(0)
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(field.reduce(a.value * b.value))
    if isinstance(a, Const) and isinstance(b, Mul) and isinstance(b.left, Const):
        return fmul(field, Const(field.reduce(a.value * b.left.value)), b.right)
    return Mul(a, b)


def finv(field: PrimeField, a: Formula) -> Formula:
    if isinstance(a, Const) and a.value % field.p != 0:
        return Const(field.inv(a.value))
    if isinstance(a, Inv):
        return a.child
    return Inv(a)


def fneg(field: PrimeField, a: Formula) -> Formula:
    return fmul(field, Const(field.neg_one()), a)


def fsub(field: PrimeField, a: Formula, b: Formula) -> Formula:
    return fadd(field, a, fneg(field, b))


def fprod(field: PrimeField, factors: Iterable[Formula]) -> Formula:
    """Left-to-right product; empty product is 1."""
    result = None
    for f in factors:
        result = f if result is None else fmul(field, result, f)
    return Const(1) if result is None else result


def fsum(field: PrimeField, terms: Iterable[Formula]) -> Formula:
    result = None
    for t in terms:
        result = t if result is None else fadd(field, result, t)
    return Const(0) if result is None else result


# ---------------------------------------------------------------------------
# affine structure
# ---------------------------------------------------------------------------

def _degree_bound(phi: Formula) -> int:
    """Structural degree bound, capped at 2.  Inv counts as nonlinear."""

    def fn(node, ch):
        if isinstance(node, Const):
            return 0
        if isinstance(node, Var):
            return 1
        if isinstance(node, Add):
            return min(2, max(ch))
        if isinstance(node, Mul):
            return min(2, ch[0] + ch[1])
        return 2

    return fold(phi, fn)


def is_affine(phi: Formula) -> bool:
    return _degree_bound(phi) <= 1


def is_constant_formula(phi: Formula) -> bool:
    return _degree_bound(phi) == 0


def affine_parts(field: PrimeField, phi: Formula) -> tuple[int, dict[str, int]]:
    """Constant term and variable coefficients of an affine formula."""

    def fn(node, ch):
        if isinstance(node, Const):
            return (field.reduce(node.value), {})
        if isinstance(node, Var):
            return (0, {node.name: 1})
        if isinstance(node, Add):
            (c0, m0), (c1, m1) = ch
            out = dict(m0)
            for k, v in m1.items():
                out[k] = field.reduce(out.get(k, 0) + v)
            return (field.reduce(c0 + c1), out)
        if isinstance(node, Mul):
            (c0, m0), (c1, m1) = ch
            if m0 and m1:
                raise ValueError("formula is not affine")
            if m1:  # scalar * affine
                return (field.reduce(c0 * c1), {k: field.reduce(c0 * v) for k, v in m1.items()})
            return (field.reduce(c0 * c1), {k: field.reduce(v * c1) for k, v in m0.items()})
        raise ValueError("formula is not affine")

    c, m = fold(phi, fn)
    return c, {k: v for k, v in m.items() if v != 0}


def collapse_affine(field: PrimeField, phi: Formula) -> Formula:
    """Rewrite an affine formula as c0 + sum ci*xi (exact, canonical order).

    Non-affine formulas are returned unchanged.
    """
    if not is_affine(phi):
        return phi
    c0, coefs = affine_parts(field, phi)
    terms = []
    if c0 != 0:
        terms.append(Const(c0))
    for name in sorted(coefs, key=var_sort_key):
        v = coefs[name]
        terms.append(Var(name) if v == 1 else Mul(Const(v), Var(name)))
    result = fsum(field, terms)
    return result if size(result) < size(phi) else phi


def simplify(field: PrimeField, phi: Formula, collapse: bool = True) -> Formula:
    """Bottom-up constant folding and zero/one absorption; optionally
    collapse affine subtrees to canonical form.  All rewrites are exact ring
    identities, so the result computes the same rational function.
    """

    def fn(node, ch):
        if isinstance(node, Add):
            out = fadd(field, ch[0], ch[1])
        elif isinstance(node, Mul):
            out = fmul(field, ch[0], ch[1])
        elif isinstance(node, Inv):
            out = finv(field, ch[0])
        elif isinstance(node, Const):
            out = Const(field.reduce(node.value))
        else:
            out = node
        if collapse and isinstance(out, (Add, Mul)):
            out = collapse_affine(field, out)
        return out

    return fold(phi, fn)


# ---------------------------------------------------------------------------
# variable names
# ---------------------------------------------------------------------------

_VAR_RE = re.compile(r"^(?:x|y|x([0-9]+)|z([0-9]+))$")


def canonical_var_name(name: str):
    """Validate and canonicalize a variable name, or None if unknown.

    The universe is x1, x2, ... plus z0, z1, ... plus the bivariate pair
    x, y.  Leading zeros in indices are normalized away.
    """
    m = _VAR_RE.match(name)
    if not m:
        return None
    if m.group(1) is not None:
        i = int(m.group(1))
        return f"x{i}" if i >= 1 else None
    if m.group(2) is not None:
        return f"z{int(m.group(2))}"
    return name


def var_sort_key(name: str):
    if name == "y":
        return (0, 0)
    if name == "x":
        return (1, 0)
    if name.startswith("x"):
        return (2, int(name[1:]))
    return (3, int(name[1:]))


def var_index(name: str) -> Optional[int]:
    """Numeric index for universe checks (x3 -> 3, z5 -> 5), None for x/y."""
    if name in ("x", "y"):
        return None
    return int(name[1:])


def fresh_var(*phis: Formula, prefix: str = "z") -> str:
    """A z-variable name not used in any of the given formulas."""
    top = -1
    for phi in phis:
        for name in variables(phi):
            if name.startswith(prefix) and name != prefix:
                top = max(top, int(name[1:]))
    return f"{prefix}{top + 1}"


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>[0-9]+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<inv>\^\s*-\s*1)|(?P<op>[-+*()]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {stripped[0]!r}", at)
        if m.group("int"):
            out.append(("int", m.group("int"), m.start("int")))
        elif m.group("name"):
            out.append(("name", m.group("name"), m.start("name")))
        elif m.group("inv"):
            out.append(("inv", "^-1", m.start("inv")))
        else:
            out.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return out


_PREC = {"+": 1, "-": 1, "*": 2, "neg": 3}


def parse_formula(
    text: str,
    field: PrimeField,
    variable_universe: Optional[int] = None,
) -> Formula:
    """Parse the formula grammar.

    expr := term (('+'|'-') term)* ; term := factor ('*' factor)* ;
    factor := atom '^-1'* | '-' factor ; atom := var | integer | '(' expr ')'.
    Integers are reduced mod p; a - b is stored as Add(a, Mul(p-1, b)).
    Raises ParseError with a character position on malformed input, and on
    variable indices exceeding the universe when one is given.
    """
    tokens = _tokenize(text)
    operands: list[Formula] = []
    ops: list[tuple[str, int]] = []  # (op or "neg" or "(", position)
    prev_operand = False  # True when the previous token completed an operand

    def apply_op(op: str, pos: int):
        if op == "neg":
            if not operands:
                raise ParseError("missing operand for unary minus", pos)
            a = operands.pop()
            operands.append(Mul(Const(field.neg_one()), a))
            return
        if len(operands) < 2:
            raise ParseError(f"missing operand for {op!r}", pos)
        b = operands.pop()
        a = operands.pop()
        if op == "+":
            operands.append(Add(a, b))
        elif op == "-":
            operands.append(Add(a, Mul(Const(field.neg_one()), b)))
        else:
            operands.append(Mul(a, b))

    def pop_ge(prec: int, pos: int):
        while ops and ops[-1][0] != "(" and _PREC[ops[-1][0]] >= prec:
            apply_op(*ops.pop())

    for kind, value, pos in tokens:
        if kind == "int":
            if prev_operand:
                raise ParseError("expected an operator before integer", pos)
            operands.append(Const(field.reduce(int(value))))
            prev_operand = True
        elif kind == "name":
            if prev_operand:
                raise ParseError("expected an operator before variable", pos)
            name = canonical_var_name(value)
            if name is None:
                raise ParseError(f"unknown variable name {value!r}", pos)
            idx = var_index(name)
            if variable_universe is not None and idx is not None and idx > variable_universe:
                raise ParseError(
                    f"variable {name!r} exceeds the declared universe of {variable_universe}",
                    pos,
                )
            operands.append(Var(name))
            prev_operand = True
        elif kind == "inv":
            if not prev_operand:
                raise ParseError("'^-1' must follow an operand", pos)
            operands.append(Inv(operands.pop()))
        elif value == "(":
            if prev_operand:
                raise ParseError("expected an operator before '('", pos)
            ops.append(("(", pos))
            prev_operand = False
        elif value == ")":
            if not prev_operand:
                raise ParseError("unexpected ')'", pos)
            while ops and ops[-1][0] != "(":
                apply_op(*ops.pop())
            if not ops:
                raise ParseError("unmatched ')'", pos)
            ops.pop()
            prev_operand = True
        elif value == "-" and not prev_operand:
            ops.append(("neg", pos))
        else:  # binary + - *
            if not prev_operand:
                raise ParseError(f"unexpected {value!r}", pos)
            pop_ge(_PREC[value], pos)
            ops.append((value, pos))
            prev_operand = False

    if not tokens:
        raise ParseError("empty formula", 0)
    last_pos = tokens[-1][2]
    if not prev_operand:
        raise ParseError("formula ends with an operator", last_pos)
    while ops:
        op, pos = ops.pop()
        if op == "(":
            raise ParseError("unmatched '('", pos)
        apply_op(op, pos)
    if len(operands) != 1:
        raise ParseError("malformed expression", last_pos)
    return operands[0]


# ---------------------------------------------------------------------------
# printer
# ---------------------------------------------------------------------------

_LVL_ADD, _LVL_MUL, _LVL_NEG, _LVL_ATOM = 1, 2, 3, 4


def format_formula(phi: Formula, field: Optional[PrimeField] = None) -> str:
    """Render to the formula grammar; parse(format(phi)) is structurally
    identical to phi.  Multiplication by p - 1 prints as minus when the
    field is known (it always is for parsed formulas: p is recoverable only
    by the caller, so pass it for the sugar).
    """
    neg_one = field.neg_one() if field is not None else None

    def is_neg(node):
        return (
            isinstance(node, Mul)
            and isinstance(node.left, Const)
            and neg_one is not None
            and node.left.value == neg_one
        )

    # fn returns (rendering, level, negated_body); negated_body is the
    # (rendering, level) of b when the node has the minus-sugar shape
    # Mul(p-1, b), letting the Add case print "a - b".
    def fn(node, ch):
        if isinstance(node, Var):
            return (node.name, _LVL_ATOM, None)
        if isinstance(node, Const):
            return (str(node.value), _LVL_ATOM, None)
        if isinstance(node, Inv):
            s, _, _ = ch[0]
            return (f"({s})^-1", _LVL_ATOM, None)
        if isinstance(node, Mul):
            if is_neg(node):
                s, lvl, _ = ch[1]
                body = s if lvl >= _LVL_NEG else f"({s})"
                return (f"-{body}", _LVL_NEG, (s, lvl))
            (ls, ll, _), (rs, rl, _) = ch
            left = ls if ll >= _LVL_MUL else f"({ls})"
            right = rs if rl > _LVL_MUL else f"({rs})"
            return (f"{left}*{right}", _LVL_MUL, None)
        # Add
        (ls, ll, _), (rs, rl, rbody) = ch
        left = ls if ll >= _LVL_ADD else f"({ls})"
        if rbody is not None:
            bs, bl = rbody
            return (f"{left} - {bs if bl >= _LVL_MUL else f'({bs})'}", _LVL_ADD, None)
        right = rs if rl > _LVL_ADD else f"({rs})"
        return (f"{left} + {right}", _LVL_ADD, None)

    return fold(phi, fn)[0]
