"""Formula representation: parsing, printing, metrics, splitter."""

import pytest
from hypothesis import given, settings, strategies as st

from skewrank.corpus import random_formula
from skewrank.field import PrimeField
from skewrank.formula import (
    Add,
    Const,
    Inv,
    Mul,
    NoSplitterError,
    ParseError,
    Var,
    collapse_affine,
    depth,
    find_splitter,
    format_formula,
    heavy_split_gate,
    is_affine,
    metrics,
    occurrences,
    parse_formula,
    replace_at_path,
    simplify,
    size,
    structural_equal,
    substitute,
    variables,
    weights,
)

F = PrimeField(2**61 - 1)
NEG = F.neg_one()


def test_parse_product_plus_const():
    phi = parse_formula("x1*x2 + 3", F)
    assert structural_equal(phi, Add(Mul(Var("x1"), Var("x2")), Const(3)))


def test_parse_inverse_of_sum():
    phi = parse_formula("(x1 + x2)^-1", F)
    assert structural_equal(phi, Inv(Add(Var("x1"), Var("x2"))))


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_formula("x1 * * x2", F)
    assert e.value.position == 5


def test_parse_unknown_variable():
    with pytest.raises(ParseError, match="unknown variable"):
        parse_formula("w3 + 1", F)


def test_parse_universe_bound():
    parse_formula("x3", F, variable_universe=3)
    with pytest.raises(ParseError, match="universe"):
        parse_formula("x4", F, variable_universe=3)


def test_subtraction_sugar():
    phi = parse_formula("x1 - x2", F)
    assert structural_equal(phi, Add(Var("x1"), Mul(Const(NEG), Var("x2"))))


def test_integers_reduced_mod_p():
    phi = parse_formula(str(F.p + 5), F)
    assert structural_equal(phi, Const(5))


def test_format_simple():
    assert format_formula(Var("x1"), F) == "x1"
    assert format_formula(Inv(Var("x2")), F) == "(x2)^-1"


def test_format_minus_sugar_roundtrip():
    phi = parse_formula("x1*x2 - x2*x1", F)
    assert format_formula(phi, F) == "x1*x2 - x2*x1"


@pytest.mark.parametrize(
    "text",
    [
        "x1",
        "-x1",
        "x1 - -x2",
        "x1*(x2 + x3)*x1",
        "((x1)^-1)^-1",
        "1 - 2*x1 + x2*3",
        "z0*z1 - (y + x)^-1",
    ],
)
def test_roundtrip_selected(text):
    phi = parse_formula(text, F)
    again = parse_formula(format_formula(phi, F), F)
    assert structural_equal(phi, again)


def test_roundtrip_random_corpus():
    # property check over 1000 generated formulas of size <= 200
    for i in range(1000):
        phi = random_formula(F, 10 + (i % 191), 4, seed=10_000 + i, allow_inv=(i % 3 == 0))
        again = parse_formula(format_formula(phi, F), F)
        assert structural_equal(phi, again)


@st.composite
def formulas(draw, max_depth=5):
    kind = draw(st.integers(0, 4 if max_depth > 0 else 1))
    if kind == 0:
        return Var(f"x{draw(st.integers(1, 4))}")
    if kind == 1:
        return Const(draw(st.integers(0, 50)))
    if kind == 2:
        return Inv(draw(formulas(max_depth=max_depth - 1)))
    left = draw(formulas(max_depth=max_depth - 1))
    right = draw(formulas(max_depth=max_depth - 1))
    return Add(left, right) if kind == 3 else Mul(left, right)


@settings(max_examples=60, deadline=None)
@given(formulas())
def test_roundtrip_hypothesis(phi):
    again = parse_formula(format_formula(phi, F), F)
    assert structural_equal(phi, again)


def test_metrics_single_var():
    s, d, w = metrics(Var("x1"))
    assert (s, d) == (1, 0)


def test_metrics_product():
    phi = Mul(Var("x1"), Var("x2"))
    s, d, _ = metrics(phi)
    assert (s, d) == (3, 1)


def test_metrics_left_comb_spine():
    phi = Mul(Mul(Mul(Var("x1"), Var("x2")), Var("x3")), Var("x4"))
    s, d, w = metrics(phi)
    assert (s, d) == (7, 3)
    spine = [w[id(phi)], w[id(phi.left)], w[id(phi.left.left)]]
    assert spine == [7, 5, 3]


def test_substitute_shares_image():
    image = Mul(Var("x"), Var("y"))
    phi = Add(Var("x1"), Mul(Var("x1"), Var("x2")))
    out = substitute(phi, {"x1": image})
    assert out.left is out.right.left  # same object at both occurrences
    assert size(out) == 1 + (3 + 1 + 1) + 3  # tree-size counts multiplicity


def test_occurrences_counts_multiplicity():
    shared = Mul(Var("z1"), Var("x1"))
    phi = Add(shared, shared)
    assert occurrences(phi, "z1") == 2


def test_find_splitter_left_comb_window_7():
    phi = Mul(Mul(Mul(Var("x1"), Var("x2")), Var("x3")), Var("x4"))
    gate, path = find_splitter(phi, window_size=7)
    assert weights(phi)[id(gate)] == 3
    assert path == (0, 0)


def test_find_splitter_below_threshold():
    with pytest.raises(NoSplitterError):
        find_splitter(Var("x1"))


def test_find_splitter_complete_tree_15():
    def tree(d):
        if d == 0:
            return Var("x1")
        return Add(tree(d - 1), tree(d - 1))

    phi = tree(3)  # 15 nodes
    gate, path = find_splitter(phi)
    assert weights(phi)[id(gate)] == 7
    assert path == (0,)  # smallest preorder index wins the tie


def test_find_splitter_window_respected_on_corpus():
    for i in range(30):
        phi = random_formula(F, 40, 3, seed=777 + i)
        s = size(phi)
        if s < 9:
            continue
        try:
            gate, _ = find_splitter(phi)
        except NoSplitterError:
            continue  # window can be empty for unlucky node counts
        w = weights(phi)[id(gate)]
        assert 3 * w >= s and 3 * w < 2 * s


def test_heavy_split_fallback_terminates():
    # size-10 shape whose [s/3, 2s/3) window is empty
    t3 = Mul(Var("x1"), Var("x2"))
    phi = Mul(Mul(t3, Mul(Var("x3"), Var("x4"))), Inv(Var("x5")))
    with pytest.raises(NoSplitterError):
        find_splitter(phi)
    gate, path = heavy_split_gate(phi)
    w = weights(phi)
    assert 3 * w[id(gate)] <= 2 * size(phi)
    assert path  # not the root


def test_replace_at_path():
    phi = Mul(Var("x1"), Add(Var("x2"), Var("x3")))
    out = replace_at_path(phi, (1, 0), Const(9))
    assert structural_equal(out, Mul(Var("x1"), Add(Const(9), Var("x3"))))
    assert structural_equal(phi, Mul(Var("x1"), Add(Var("x2"), Var("x3"))))


def test_affine_detection_and_collapse():
    phi = parse_formula("2*x1 + x2*3 + 5 + 0*x3", F)
    assert is_affine(phi)
    out = collapse_affine(F, phi)
    assert format_formula(out, F) == "5 + 2*x1 + 3*x2"
    assert not is_affine(parse_formula("x1*x2", F))
    assert not is_affine(parse_formula("(x1)^-1", F))


def test_simplify_zero_propagation():
    phi = parse_formula("x1*0 + x2", F)
    assert structural_equal(simplify(F, phi), Var("x2"))


def test_variables_sorted():
    phi = parse_formula("z2 + x1*y + x10 + x2", F)
    assert variables(phi) == ["y", "x1", "x2", "x10", "z2"]


def test_parse_empty_and_unbalanced():
    with pytest.raises(ParseError, match="empty"):
        parse_formula("   ", F)
    with pytest.raises(ParseError, match="unmatched"):
        parse_formula("(x1 + x2", F)
    with pytest.raises(ParseError, match="unmatched"):
        parse_formula("x1 + x2)", F)
    with pytest.raises(ParseError, match="ends with"):
        parse_formula("x1 *", F)


def test_parse_deep_nesting_is_iterative():
    text = "(" * 500 + "x1" + ")" * 500 + " + x2"
    phi = parse_formula(text, F)
    assert structural_equal(phi, Add(Var("x1"), Var("x2")))
    # deep right comb: format and metrics must not recurse
    comb = Var("x1")
    for _ in range(3000):
        comb = Mul(Var("x2"), comb)
    assert size(comb) == 6001
    assert depth(comb) == 3000
    reparsed = parse_formula(format_formula(comb, F), F)
    assert size(reparsed) == 6001
