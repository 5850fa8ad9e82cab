import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chmogp import gdt
from chmogp.data import Attribute, DatasetSchema, Split
from chmogp.gdt import And, Branch, Cmp, Leaf, Not, Or, VariationRates
from chmogp.roc_core import DegenerateSplitError, counts_to_point

SCHEMA = DatasetSchema(
    attributes=(
        Attribute("x0", "numeric", 0.0, 1.0),
        Attribute("x1", "numeric", -5.0, 5.0),
        Attribute("x2", "categorical", 1.0, 3.0, (1.0, 2.0, 3.0)),
    ),
    label_column=3,
    positive=("1",),
)

seeds = st.integers(0, 2**32 - 1)


def rng(seed=0):
    return np.random.default_rng(seed)


def deep_tree(d):
    t = Leaf(1)
    for _ in range(d - 1):
        t = Branch(Cmp(0, "<", 0.5), t, Leaf(0))
    return t


def all_trees(t):
    return [gdt.subtree(t, p) for p in gdt.node_paths(t)]


def constants_in_range(t):
    for c in gdt.comparisons(t):
        a = SCHEMA.attributes[c.attr]
        if a.kind == "categorical":
            assert c.op == "=" and c.value in a.codes
        else:
            assert c.op in "<>" and a.low <= c.value <= a.high


# construction ---------------------------------------------------------------

def test_depth_one_is_a_leaf():
    for s in range(50):
        assert isinstance(gdt.random_tree(SCHEMA, rng(s), depth_max=1), Leaf)


def test_random_tree_depth_bound():
    r = rng(1)
    for _ in range(10000):
        assert gdt.depth(gdt.random_tree(SCHEMA, r, depth_max=3)) <= 3


def test_random_tree_deterministic():
    a = [gdt.random_tree(SCHEMA, rng(7)) for _ in range(3)]
    b = [gdt.random_tree(SCHEMA, rng(7)) for _ in range(3)]
    assert a == b


def test_full_trees_reach_their_depth():
    for s in range(30):
        t = gdt.random_tree(SCHEMA, rng(s), 3, 3, "full")
        assert gdt.depth(t) == 3 and gdt.size(t) == 7


def test_ramped_half_and_half():
    trees = gdt.ramped_half_and_half(20, SCHEMA, rng(3), 2, 3)
    assert len(trees) == 20
    assert {gdt.depth(t) for t in trees} <= {2, 3}
    for t in trees:
        constants_in_range(t)


# classification -------------------------------------------------------------

def test_classify_examples():
    assert gdt.classify(Leaf(1), [0.2, 0.0, 1.0]) == 1
    t = Branch(Cmp(0, "<", 0.5), Leaf(1), Leaf(0))
    assert gdt.classify(t, [0.3, 0, 1]) == 1
    assert gdt.classify(t, [0.7, 0, 1]) == 0
    u = Branch(Not(Cmp(0, ">", 0.5)), Leaf(1), Leaf(0))
    xs = np.linspace(0, 1, 101)
    xs = xs[xs != 0.5]
    X = np.column_stack([xs, np.zeros_like(xs), np.ones_like(xs)])
    assert np.array_equal(gdt.predict(t, X), gdt.predict(u, X))


def test_boolean_connectives():
    X = np.array([[0.2, 1.0, 2.0], [0.2, -1.0, 2.0], [0.8, 1.0, 3.0]])
    t = Branch(And(Cmp(0, "<", 0.5), Cmp(1, ">", 0.0)), Leaf(1), Leaf(0))
    assert gdt.predict(t, X).tolist() == [True, False, False]
    t = Branch(Or(Cmp(2, "=", 3.0), Cmp(1, "<", 0.0)), Leaf(1), Leaf(0))
    assert gdt.predict(t, X).tolist() == [False, True, True]


def test_classify_bad_attribute():
    with pytest.raises(IndexError):
        gdt.classify(Branch(Cmp(9, "<", 0.5), Leaf(1), Leaf(0)), [0.1, 0.2, 1.0])


def _split():
    X = np.array([[0.1, 0, 1], [0.4, 0, 1], [0.6, 0, 1], [0.9, 0, 1]], dtype=float)
    y = np.array([1, 0, 1, 0])
    return Split(X, y, SCHEMA)


def test_evaluate_examples():
    s = _split()
    c = gdt.evaluate(Leaf(1), s)
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 2, 0, 0)
    assert counts_to_point(c) == (1, 1)
    assert counts_to_point(gdt.evaluate(Leaf(0), s)) == (0, 0)
    # x0 < 0.5 -> positive: rows 0 (pos) and 1 (neg)
    c = gdt.evaluate(Branch(Cmp(0, "<", 0.5), Leaf(1), Leaf(0)), s)
    assert (c.tp, c.fp, c.tn, c.fn) == (1, 1, 1, 1)


def test_evaluate_degenerate():
    s = Split(np.zeros((3, 3)), np.array([1, 1, 1]), SCHEMA)
    with pytest.raises(DegenerateSplitError):
        gdt.evaluate(Leaf(1), s)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_evaluation_totality(seed):
    r = rng(seed)
    X = np.column_stack([r.random(30), r.uniform(-5, 5, 30), r.integers(1, 4, 30)]).astype(float)
    y = np.r_[np.ones(10, int), np.zeros(20, int)]
    t = gdt.random_tree(SCHEMA, r, 1, 5)
    c = gdt.evaluate(t, Split(X, y, SCHEMA))
    assert c.tp + c.fp + c.tn + c.fn == 30
    assert c.tp + c.fn == 10 and c.fp + c.tn == 20
    # the vectorised path agrees with row-by-row classification
    expect = [gdt.classify(t, row) for row in X]
    assert gdt.predict(t, X).astype(int).tolist() == expect


# variation ------------------------------------------------------------------

def test_crossover_of_leaves():
    a, b = gdt.crossover(Leaf(0), Leaf(1), rng())
    assert {a, b} == {Leaf(0), Leaf(1)}


def test_crossover_root_swap():
    a = gdt.random_tree(SCHEMA, rng(1), 3, 3, "full")
    b = gdt.random_tree(SCHEMA, rng(2), 3, 3, "full")
    assert gdt.replace(a, (), b) == b and gdt.replace(b, (), a) == a
    for s in range(200):
        ca, cb = gdt.crossover(a, b, rng(s))
        if ca == b:
            assert cb == a
            break
    else:
        pytest.fail("root swap never drawn")


def test_crossover_depth_bound():
    r = rng(4)
    a, b = deep_tree(17), deep_tree(17)
    for _ in range(10000):
        ca, cb = gdt.crossover(a, b, r)
        assert gdt.depth(ca) <= 17 and gdt.depth(cb) <= 17


def test_mutate_bounds_and_determinism():
    assert isinstance(gdt.mutate(Leaf(1), SCHEMA, rng()), (Leaf, Branch))
    t = deep_tree(17)
    r = rng(5)
    for _ in range(2000):
        assert gdt.depth(gdt.mutate(t, SCHEMA, r)) <= 17
    assert gdt.mutate(t, SCHEMA, rng(9)) == gdt.mutate(t, SCHEMA, rng(9))


def test_shift_contract():
    assert gdt.shift(Leaf(1), SCHEMA, rng()) == Leaf(1)
    r = rng(6)
    t = Branch(Cmp(0, "<", 0.99), Leaf(1), Branch(Cmp(1, ">", -4.9), Leaf(0), Leaf(1)))
    for _ in range(10000):
        u = gdt.shift(t, SCHEMA, r)
        constants_in_range(u)
        before, after = gdt.comparisons(t), gdt.comparisons(u)
        assert [(c.attr, c.op) for c in before] == [(c.attr, c.op) for c in after]
        assert sum(a != b for a, b in zip(before, after)) <= 1
        assert gdt.leaf_paths(u) == gdt.leaf_paths(t)
        t = u


def test_shift_step_is_bounded():
    t = Branch(Cmp(1, "<", 0.0), Leaf(1), Leaf(0))
    r = rng(8)
    for _ in range(1000):
        v = gdt.comparisons(gdt.shift(t, SCHEMA, r))[0].value
        assert abs(v) <= 1.0 + 1e-12  # 10% of a range of 10


def test_split_contract():
    s = gdt.split(Leaf(1), SCHEMA, rng())
    assert isinstance(s, Branch) and s.then == Leaf(1) and s.orelse == Leaf(0)
    lone = Branch(Cmp(0, "<", 0.5), deep_tree(16), deep_tree(16))
    assert gdt.depth(lone) == 17
    r = rng(7)
    for _ in range(500):
        u = gdt.split(lone, SCHEMA, r)
        assert gdt.depth(u) <= 17
    t = gdt.random_tree(SCHEMA, rng(2), 3, 3, "full")
    for s in range(500):
        u = gdt.split(t, SCHEMA, rng(s))
        assert gdt.leaf_count(u) == gdt.leaf_count(t) + 1


def test_split_at_max_depth_unchanged():
    t = Branch(Cmp(0, "<", 0.5), Leaf(1), Leaf(0))
    assert gdt.split(t, SCHEMA, rng(), max_depth=2) == t


def test_variation_rates_validated():
    with pytest.raises(ValueError):
        VariationRates(crossover=1.5)


@settings(max_examples=150, deadline=None)
@given(seeds, seeds)
def test_vary_closure_and_determinism(s1, s2):
    a = gdt.random_tree(SCHEMA, rng(s1), 1, 4)
    b = gdt.random_tree(SCHEMA, rng(s2), 1, 4)
    rates = VariationRates(1.0, 0.5, 0.5, 0.5)
    c = gdt.vary(a, b, SCHEMA, rates, rng(s1 ^ s2))
    assert c == gdt.vary(a, b, SCHEMA, rates, rng(s1 ^ s2))
    assert gdt.depth(c) <= gdt.MAX_DEPTH
    constants_in_range(c)
    for node in all_trees(c):
        assert isinstance(node, (Leaf, Branch))


def test_zero_rates_clone_first_parent():
    a = gdt.random_tree(SCHEMA, rng(1), 3, 3, "full")
    b = gdt.random_tree(SCHEMA, rng(2), 3, 3, "full")
    assert gdt.vary(a, b, SCHEMA, VariationRates(0, 0, 0, 0), rng()) is a


# text form ------------------------------------------------------------------

def test_sexpr_example_round_trip():
    text = "(if (< x3 0.25) 1 (if (= x7 2) 0 1))"
    t = gdt.from_sexpr(text)
    assert t == Branch(Cmp(3, "<", 0.25), Leaf(1), Branch(Cmp(7, "=", 2.0), Leaf(0), Leaf(1)))
    assert gdt.to_sexpr(t) == text


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_sexpr_round_trip(seed):
    t = gdt.random_tree(SCHEMA, rng(seed), 1, 5)
    assert gdt.from_sexpr(gdt.to_sexpr(t)) == t


@pytest.mark.parametrize("bad", ["(if (< x0 1) 1", "(if (~ x0 1) 1 0)", "2", "(if (< x0 1) 1 0) 1"])
def test_sexpr_rejects_malformed(bad):
    with pytest.raises(ValueError):
        gdt.from_sexpr(bad)
