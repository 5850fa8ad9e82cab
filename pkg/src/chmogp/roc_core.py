"""ROC-space geometry: confusion counts, the upper-left convex hull, AUCH and
per-point area contributions.

All routines are generic over the coordinate number type.  Points built from
integer counts use :class:`fractions.Fraction`, which keeps hull membership
and contribution comparisons exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence


class DegenerateSplitError(ValueError):
    """Raised when a split has no positives or no negatives."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError(f"negative count in {self}")

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class RocPoint(NamedTuple):
    fpr: object
    tpr: object


ORIGIN = RocPoint(Fraction(0), Fraction(0))
CORNER = RocPoint(Fraction(1), Fraction(1))


@dataclass(frozen=True)
class RocHull:
    """Upper-left convex chain from (0, 0) to (1, 1), anchors included."""

    points: tuple

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def interior(self) -> tuple:
        return self.points[1:-1]


def counts_to_point(c: ConfusionCounts) -> RocPoint:
    """Exact ``(fpr, tpr)`` of a confusion matrix."""
    if c.negatives == 0 or c.positives == 0:
        raise DegenerateSplitError(
            f"split needs both classes (positives={c.positives}, negatives={c.negatives})"
        )
    return RocPoint(Fraction(c.fp, c.negatives), Fraction(c.tp, c.positives))


def cross(o, a, b):
    """z-component of (a - o) x (b - o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def upper_chain(points: Iterable, lo=None, hi=None) -> list:
    """Upper chain of ``points`` plus the optional anchors ``lo`` and ``hi``.

    Anchors must be the componentwise minimum and maximum of the whole set.
    Collinear and duplicate points are dropped, so slopes along the returned
    chain strictly decrease (a leading vertical and a trailing horizontal
    edge are allowed).
    """
    pts = {(p[0], p[1]) for p in points}
    pts.update(tuple(a) for a in (lo, hi) if a is not None)
    pts = sorted(pts)
    chain: list = []
    for p in pts:
        while len(chain) >= 2 and cross(chain[-2], chain[-1], p) >= 0:
            chain.pop()
        chain.append(p)
    return chain


def _check_unit(p) -> None:
    if not (0 <= p[0] <= 1 and 0 <= p[1] <= 1):
        raise ValueError(f"point {tuple(p)} lies outside ROC space")


def upper_hull(points: Iterable) -> RocHull:
    """ROC convex hull of ``points`` anchored at the trivial classifiers."""
    pts = list(points)
    for p in pts:
        _check_unit(p)
    chain = upper_chain(pts, ORIGIN, CORNER)
    return RocHull(tuple(RocPoint(*p) for p in chain))


def chain_area(chain: Sequence):
    """Trapezoidal area under a chain ordered by the first coordinate."""
    area = 0
    for (x0, y0), (x1, y1) in zip(chain, chain[1:]):
        area += (x1 - x0) * (y0 + y1)
    return area / 2


def auch(h: RocHull) -> float:
    """Area under the convex hull."""
    return float(chain_area(h.points))


def triangle_contribution(L, X, U):
    """Area lost from the chain when ``X`` is removed between ``L`` and ``U``."""
    return abs(cross(L, X, U)) / 2


def _check_sorted(points: Sequence) -> None:
    for a, b in zip(points, points[1:]):
        if b[0] < a[0]:
            raise ValueError("points must be sorted by fpr")


def removal_sequence(points: Sequence) -> tuple[list, list]:
    """Greedy minimal-contribution removal order over a sorted chain.

    Returns ``(order, contribution)``: ``order`` lists interior indices in
    the order they are removed, and ``contribution[i]`` is the value point
    ``i`` had at the moment it was removed (``inf`` for the endpoints and for
    every point of a chain shorter than three).  Ties go to the lowest index.
    """
    _check_sorted(points)
    m = len(points)
    contrib = [math.inf] * m
    if m < 3:
        return [], contrib
    prev = list(range(-1, m - 1))
    nxt = list(range(1, m + 1))
    for i in range(1, m - 1):
        contrib[i] = triangle_contribution(points[i - 1], points[i], points[i + 1])
    alive = set(range(1, m - 1))
    order = []
    while alive:
        r = min(alive, key=lambda i: (contrib[i], i))
        alive.discard(r)
        order.append(r)
        lft, rgt = prev[r], nxt[r]
        nxt[lft], prev[rgt] = rgt, lft
        for j in (lft, rgt):
            if j in alive:
                contrib[j] = triangle_contribution(points[prev[j]], points[j], points[nxt[j]])
    return order, contrib


def delta_area(hull_points: Sequence) -> list:
    """Area contribution of every chain point, updated as neighbours leave."""
    return removal_sequence(hull_points)[1]
