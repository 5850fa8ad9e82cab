"""Genetic decision trees: if-then-else trees over attribute comparisons.

Trees are immutable.  Every operator takes an explicit
:class:`numpy.random.Generator` and returns a new tree, so a fixed seed
reproduces a run exactly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from chmogp.roc_core import ConfusionCounts, DegenerateSplitError

MAX_DEPTH = 17
INIT_MAX_DEPTH = 3
REPAIR_ATTEMPTS = 5


# --------------------------------------------------------------------------
# representation

@dataclass(frozen=True)
class Cmp:
    attr: int
    op: str  # '<', '>' or '='
    value: float


@dataclass(frozen=True)
class Not:
    arg: "BoolExpr"


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[Cmp, Not, And, Or]


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Branch:
    cond: BoolExpr
    then: "GdtNode"
    orelse: "GdtNode"
    # cached on construction; trees are immutable
    depth: int = field(init=False, repr=False, compare=False)
    size: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "depth", 1 + max(depth(self.then), depth(self.orelse)))
        object.__setattr__(self, "size", 1 + size(self.then) + size(self.orelse))


GdtNode = Union[Leaf, Branch]


@dataclass(frozen=True)
class VariationRates:
    crossover: float = 0.9
    mutation: float = 0.1
    shifting: float = 0.1
    splitting: float = 0.1

    def __post_init__(self):
        for name in ("crossover", "mutation", "shifting", "splitting"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} rate must lie in [0, 1]")


def depth(t: GdtNode) -> int:
    return 1 if isinstance(t, Leaf) else t.depth


def size(t: GdtNode) -> int:
    return 1 if isinstance(t, Leaf) else t.size


def leaf_count(t: GdtNode) -> int:
    if isinstance(t, Leaf):
        return 1
    return leaf_count(t.then) + leaf_count(t.orelse)


def comparisons(t) -> list[Cmp]:
    """All comparisons of a tree or condition, in pre-order."""
    if isinstance(t, Leaf):
        return []
    if isinstance(t, Branch):
        return comparisons(t.cond) + comparisons(t.then) + comparisons(t.orelse)
    if isinstance(t, Cmp):
        return [t]
    if isinstance(t, Not):
        return comparisons(t.arg)
    return comparisons(t.left) + comparisons(t.right)


def node_paths(t: GdtNode, prefix=()) -> list[tuple]:
    """Paths (0 = then, 1 = else) to every tree node, pre-order."""
    if isinstance(t, Leaf):
        return [prefix]
    return [prefix] + node_paths(t.then, prefix + (0,)) + node_paths(t.orelse, prefix + (1,))


def leaf_paths(t: GdtNode, prefix=()) -> list[tuple]:
    if isinstance(t, Leaf):
        return [prefix]
    return leaf_paths(t.then, prefix + (0,)) + leaf_paths(t.orelse, prefix + (1,))


def subtree(t: GdtNode, path) -> GdtNode:
    for step in path:
        t = t.orelse if step else t.then
    return t


def replace(t: GdtNode, path, new: GdtNode) -> GdtNode:
    if not path:
        return new
    if path[0]:
        return Branch(t.cond, t.then, replace(t.orelse, path[1:], new))
    return Branch(t.cond, replace(t.then, path[1:], new), t.orelse)


# --------------------------------------------------------------------------
# classification

def _mask(cond: BoolExpr, cols) -> np.ndarray:
    if isinstance(cond, Cmp):
        col = cols[cond.attr]
        if cond.op == "<":
            return col < cond.value
        if cond.op == ">":
            return col > cond.value
        return col == cond.value
    if isinstance(cond, Not):
        return ~_mask(cond.arg, cols)
    if isinstance(cond, And):
        return _mask(cond.left, cols) & _mask(cond.right, cols)
    return _mask(cond.left, cols) | _mask(cond.right, cols)


def _check_attrs(t: GdtNode, n_attr: int) -> None:
    for c in comparisons(t):
        if not 0 <= c.attr < n_attr:
            raise IndexError(f"attribute x{c.attr} out of range for {n_attr} attributes")


def _predict(t: GdtNode, cols, n: int) -> np.ndarray:
    if isinstance(t, Leaf):
        return np.full(n, t.label == 1)
    m = _mask(t.cond, cols)
    a, b = t.then, t.orelse
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        if a.label == b.label:
            return np.full(n, a.label == 1)
        return m if a.label == 1 else ~m
    a = _predict(a, cols, n) if isinstance(a, Branch) else a.label == 1
    b = _predict(b, cols, n) if isinstance(b, Branch) else b.label == 1
    return np.where(m, a, b)


def predict(t: GdtNode, X: np.ndarray) -> np.ndarray:
    """Boolean predictions (True = positive) for the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_attrs(t, X.shape[1])
    return _predict(t, X.T, X.shape[0])


def classify(t: GdtNode, instance) -> int:
    return int(predict(t, np.asarray(instance, dtype=float)[None, :])[0])


def evaluate(t: GdtNode, split) -> ConfusionCounts:
    """Confusion counts of ``t`` on a labelled split (``split.X``, ``split.y``)."""
    y = np.asarray(split.y, dtype=bool)
    pos = int(y.sum())
    if pos == 0 or pos == len(y):
        raise DegenerateSplitError("split needs both classes")
    cols = getattr(split, "columns", None)
    if cols is None:
        pred = predict(t, split.X)
    else:
        pred = _predict(t, cols, len(y))
    tp = int(np.count_nonzero(pred & y))
    fp = int(np.count_nonzero(pred)) - tp
    return ConfusionCounts(tp=tp, fp=fp, tn=len(y) - pos - fp, fn=pos - tp)


# --------------------------------------------------------------------------
# random construction

def random_comparison(schema, rng) -> Cmp:
    attrs = schema.attributes
    a = int(rng.integers(len(attrs)))
    info = attrs[a]
    if info.kind == "categorical":
        return Cmp(a, "=", float(info.codes[int(rng.integers(len(info.codes)))]))
    op = "<" if rng.random() < 0.5 else ">"
    return Cmp(a, op, float(rng.uniform(info.low, info.high)))


def random_condition(schema, rng, p_combine=0.2, p_not=0.2) -> BoolExpr:
    cond = random_comparison(schema, rng)
    if rng.random() < p_combine:
        other = random_comparison(schema, rng)
        cond = And(cond, other) if rng.random() < 0.5 else Or(cond, other)
    if rng.random() < p_not:
        cond = Not(cond)
    return cond


def _full(schema, rng, d) -> GdtNode:
    if d <= 1:
        return Leaf(int(rng.integers(2)))
    return Branch(random_condition(schema, rng), _full(schema, rng, d - 1), _full(schema, rng, d - 1))


def _grow(schema, rng, d, root=False) -> GdtNode:
    if d <= 1 or (not root and rng.random() < 0.5):
        return Leaf(int(rng.integers(2)))
    return Branch(random_condition(schema, rng), _grow(schema, rng, d - 1), _grow(schema, rng, d - 1))


def random_tree(schema, rng, depth_min=1, depth_max=INIT_MAX_DEPTH, method=None) -> GdtNode:
    """A full or grow tree whose depth is drawn from ``[depth_min, depth_max]``.

    ``method`` is ``"full"``, ``"grow"`` or ``None`` for a fair coin.
    """
    if not schema.attributes:
        raise ValueError("schema has no attributes")
    d = int(rng.integers(depth_min, depth_max + 1))
    if method is None:
        method = "full" if rng.random() < 0.5 else "grow"
    if method == "full":
        return _full(schema, rng, d)
    return _grow(schema, rng, d, root=True)


def ramped_half_and_half(n: int, schema, rng, depth_min=2, depth_max=INIT_MAX_DEPTH) -> list[GdtNode]:
    """``n`` trees cycling through the depth range, alternating full and grow."""
    depths = list(range(depth_min, depth_max + 1))
    trees = []
    for i in range(n):
        d = depths[(i // 2) % len(depths)]
        method = "full" if i % 2 == 0 else "grow"
        trees.append(random_tree(schema, rng, d, d, method))
    return trees


# --------------------------------------------------------------------------
# variation

def crossover(a: GdtNode, b: GdtNode, rng, max_depth=MAX_DEPTH) -> tuple[GdtNode, GdtNode]:
    """Swap one uniformly chosen subtree of each parent."""
    pa_all, pb_all = node_paths(a), node_paths(b)
    for _ in range(REPAIR_ATTEMPTS):
        pa = pa_all[int(rng.integers(len(pa_all)))]
        pb = pb_all[int(rng.integers(len(pb_all)))]
        ca = replace(a, pa, subtree(b, pb))
        cb = replace(b, pb, subtree(a, pa))
        if depth(ca) <= max_depth and depth(cb) <= max_depth:
            return ca, cb
    return a, b


def mutate(t: GdtNode, schema, rng, max_depth=MAX_DEPTH) -> GdtNode:
    """Replace a uniformly chosen subtree by a fresh grow tree (depth <= 3)."""
    paths = node_paths(t)
    for _ in range(REPAIR_ATTEMPTS):
        p = paths[int(rng.integers(len(paths)))]
        child = replace(t, p, random_tree(schema, rng, 1, INIT_MAX_DEPTH, "grow"))
        if depth(child) <= max_depth:
            return child
    return t


def _replace_cmp(node, k: int, new: Cmp, counter: list):
    if isinstance(node, Leaf):
        return node
    if isinstance(node, Cmp):
        counter[0] += 1
        return new if counter[0] - 1 == k else node
    if isinstance(node, Branch):
        return Branch(
            _replace_cmp(node.cond, k, new, counter),
            _replace_cmp(node.then, k, new, counter),
            _replace_cmp(node.orelse, k, new, counter),
        )
    if isinstance(node, Not):
        return Not(_replace_cmp(node.arg, k, new, counter))
    return type(node)(_replace_cmp(node.left, k, new, counter), _replace_cmp(node.right, k, new, counter))


def shift(t: GdtNode, schema, rng, step=0.1) -> GdtNode:
    """Nudge one comparison constant by up to ``step`` of its attribute range.

    Categorical constants are redrawn from the observed codes.
    """
    cmps = comparisons(t)
    if not cmps:
        return t
    k = int(rng.integers(len(cmps)))
    old = cmps[k]
    info = schema.attributes[old.attr]
    if info.kind == "categorical":
        value = float(info.codes[int(rng.integers(len(info.codes)))])
    else:
        span = info.high - info.low
        value = float(np.clip(old.value + rng.uniform(-step, step) * span, info.low, info.high))
    return _replace_cmp(t, k, Cmp(old.attr, old.op, value), [0])


def split(t: GdtNode, schema, rng, max_depth=MAX_DEPTH) -> GdtNode:
    """Turn a uniformly chosen leaf into a one-test stump keeping its class
    on the 'then' side."""
    paths = leaf_paths(t)
    p = paths[int(rng.integers(len(paths)))]
    if len(p) + 2 > max_depth:
        return t
    c = subtree(t, p).label
    return replace(t, p, Branch(random_comparison(schema, rng), Leaf(c), Leaf(1 - c)))


def vary(p1: GdtNode, p2: GdtNode, schema, rates: VariationRates, rng) -> GdtNode:
    """One offspring: crossover with its rate (else a clone of ``p1``), then
    mutation, shifting and splitting, each applied independently."""
    child = crossover(p1, p2, rng)[0] if rng.random() < rates.crossover else p1
    if rng.random() < rates.mutation:
        child = mutate(child, schema, rng)
    if rng.random() < rates.shifting:
        child = shift(child, schema, rng)
    if rng.random() < rates.splitting:
        child = split(child, schema, rng)
    return child


# --------------------------------------------------------------------------
# text form: (if (< x3 0.25) 1 (if (= x7 2) 0 1))

def _fmt_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _fmt_cond(c: BoolExpr) -> str:
    if isinstance(c, Cmp):
        return f"({c.op} x{c.attr} {_fmt_num(c.value)})"
    if isinstance(c, Not):
        return f"(not {_fmt_cond(c.arg)})"
    name = "and" if isinstance(c, And) else "or"
    return f"({name} {_fmt_cond(c.left)} {_fmt_cond(c.right)})"


def to_sexpr(t: GdtNode) -> str:
    if isinstance(t, Leaf):
        return str(t.label)
    return f"(if {_fmt_cond(t.cond)} {to_sexpr(t.then)} {to_sexpr(t.orelse)})"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _parse(tokens: list, pos: int):
    tok = tokens[pos]
    if tok != "(":
        return tok, pos + 1
    items = []
    pos += 1
    while tokens[pos] != ")":
        item, pos = _parse(tokens, pos)
        items.append(item)
    return items, pos + 1


def _build_cond(x) -> BoolExpr:
    head = x[0]
    if head in ("<", ">", "="):
        return Cmp(int(x[1][1:]), head, float(x[2]))
    if head == "not":
        return Not(_build_cond(x[1]))
    if head == "and":
        return And(_build_cond(x[1]), _build_cond(x[2]))
    if head == "or":
        return Or(_build_cond(x[1]), _build_cond(x[2]))
    raise ValueError(f"unknown operator {head!r}")


def _build(x) -> GdtNode:
    if isinstance(x, str):
        if x not in ("0", "1"):
            raise ValueError(f"bad leaf {x!r}")
        return Leaf(int(x))
    if x[0] != "if" or len(x) != 4:
        raise ValueError(f"expected (if cond then else), got {x!r}")
    return Branch(_build_cond(x[1]), _build(x[2]), _build(x[3]))


def from_sexpr(text: str) -> GdtNode:
    tokens = _TOKEN.findall(text)
    try:
        tree, pos = _parse(tokens, 0)
    except IndexError:
        raise ValueError("unbalanced parentheses") from None
    if pos != len(tokens):
        raise ValueError("trailing tokens after tree")
    return _build(tree)
