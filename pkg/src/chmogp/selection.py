"""Sorting and survivor selection schemes for bi-objective ROC populations.

Objective vectors are compared in the (minimize fpr, maximize tpr)
orientation.  Convex-hull sorting peels the population into successive ROC
hulls; the redundancy-free variant first exiles repeated objective vectors to
an archive that is discarded before any level is touched.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from chmogp.roc_core import (
    CORNER,
    ORIGIN,
    ConfusionCounts,
    removal_sequence,
    upper_chain,
)


@dataclass(frozen=True, eq=False)
class ObjectiveVector:
    """ROC objectives of one classifier, kept as exact counts."""

    fp: int
    negatives: int
    tp: int
    positives: int
    fpr: Fraction = field(init=False, repr=False)
    tpr: Fraction = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "fpr", Fraction(self.fp, self.negatives))
        object.__setattr__(self, "tpr", Fraction(self.tp, self.positives))

    @classmethod
    def from_counts(cls, c: ConfusionCounts) -> "ObjectiveVector":
        return cls(c.fp, c.negatives, c.tp, c.positives)

    @classmethod
    def of(cls, fpr, tpr) -> "ObjectiveVector":
        """Build from rates; floats are read through their decimal repr."""
        f = Fraction(str(fpr)) if isinstance(fpr, float) else Fraction(fpr)
        t = Fraction(str(tpr)) if isinstance(tpr, float) else Fraction(tpr)
        return cls(f.numerator, f.denominator, t.numerator, t.denominator)

    @property
    def point(self) -> tuple[Fraction, Fraction]:
        return (self.fpr, self.tpr)

    def __eq__(self, other):
        if not isinstance(other, ObjectiveVector):
            return NotImplemented
        return self.point == other.point

    def __hash__(self):
        return hash(self.point)

    def __repr__(self):
        return f"ObjectiveVector(fpr={self.fpr}, tpr={self.tpr})"


class Dominance(enum.Enum):
    U_DOMINATES = "u_dominates"
    V_DOMINATES = "v_dominates"
    NONDOMINATED = "nondominated"
    EQUAL = "equal"


def dominance(u: ObjectiveVector, v: ObjectiveVector) -> Dominance:
    if u.point == v.point:
        return Dominance.EQUAL
    if u.fpr <= v.fpr and u.tpr >= v.tpr:
        return Dominance.U_DOMINATES
    if v.fpr <= u.fpr and v.tpr >= u.tpr:
        return Dominance.V_DOMINATES
    return Dominance.NONDOMINATED


def _dominates(u, v) -> bool:
    return u[0] <= v[0] and u[1] >= v[1] and u != v


# --------------------------------------------------------------------------
# sorting

@dataclass
class LevelPartition:
    """Best-first levels of population indices plus the duplicate archive.

    Each level is ordered by ascending fpr (then tpr, then index).
    """

    levels: list[list[int]]
    redundant_archive: list[int] = field(default_factory=list)

    def level_of(self) -> dict[int, int]:
        out = {i: k for k, lvl in enumerate(self.levels) for i in lvl}
        for i in self.redundant_archive:
            out[i] = len(self.levels)
        return out


def _point(x):
    x = getattr(x, "objectives", x)
    return x.point if hasattr(x, "point") else (x[0], x[1])


def _points(pop) -> list:
    return [_point(x) for x in pop]


def roc_frame(pop) -> tuple[list, tuple, object]:
    """Working coordinates ``(pts, (lo, hi), scale)`` for a population.

    When every member is an :class:`ObjectiveVector` over the same split the
    points are the integer pairs ``(fp, tp)`` with ``hi = (N, P)``; that map is
    affine, so hull membership, dominance and contribution order are kept and
    areas shrink back to ROC units by ``scale = 1 / (N * P)``.  Anything else
    stays in exact rate coordinates.
    """
    vs = [getattr(x, "objectives", x) for x in pop]
    if vs and all(isinstance(v, ObjectiveVector) for v in vs):
        n, p = vs[0].negatives, vs[0].positives
        if all(v.negatives == n and v.positives == p for v in vs):
            return [(v.fp, v.tp) for v in vs], ((0, 0), (n, p)), Fraction(1, n * p)
    return _points(pop), (ORIGIN, CORNER), 1


def _peel(keys: list, anchors=(ORIGIN, CORNER)) -> list[list]:
    lo, hi = anchors
    remaining = set(keys)
    levels = []
    while remaining:
        level = remaining.intersection(upper_chain(remaining, lo, hi))
        if not level:
            # everything left sits on or under the diagonal: peel the
            # unanchored upper chain instead
            level = remaining.intersection(upper_chain(remaining))
        levels.append(sorted(level))
        remaining -= level
    return levels


def ch_sort(pop: Sequence, redundancy: bool = False) -> LevelPartition:
    """Convex-hull sorting.

    With ``redundancy=False`` every repeated objective vector beyond its first
    occurrence goes to ``redundant_archive``; otherwise copies share the level
    of their representative.
    """
    pts, anchors, _ = roc_frame(pop)
    holders: dict = {}
    archive = []
    for i, p in enumerate(pts):
        if p in holders:
            if redundancy:
                holders[p].append(i)
            else:
                archive.append(i)
        else:
            holders[p] = [i]
    levels = [[i for key in lvl for i in holders[key]] for lvl in _peel(list(holders), anchors)]
    return LevelPartition(levels, archive)


def ch_sort_no_redundancy(pop: Sequence) -> LevelPartition:
    return ch_sort(pop, redundancy=False)


def fast_nondominated_sort(pop: Sequence) -> list[list[int]]:
    """NSGA-II front peeling; equal vectors share a front."""
    pts = roc_frame(pop)[0]
    n = len(pts)
    dominated_by = [[] for _ in range(n)]
    count = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if _dominates(pts[i], pts[j]):
                dominated_by[i].append(j)
                count[j] += 1
            elif _dominates(pts[j], pts[i]):
                dominated_by[j].append(i)
                count[i] += 1
    fronts = []
    current = [i for i in range(n) if count[i] == 0]
    while current:
        fronts.append(sorted(current, key=lambda i: (pts[i], i)))
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(j)
        current = nxt
    return fronts


# --------------------------------------------------------------------------
# within-level indicators

def crowding_distance(front: Sequence) -> list[float]:
    """NSGA-II crowding distance, normalised by the front's own range."""
    pts = [(float(a), float(b)) for a, b in _points(front)]
    n = len(pts)
    dist = [0.0] * n
    if n <= 2:
        return [math.inf] * n
    for m in range(2):
        order = sorted(range(n), key=lambda i: (pts[i][m], i))
        lo, hi = pts[order[0]][m], pts[order[-1]][m]
        dist[order[0]] = dist[order[-1]] = math.inf
        if hi == lo:
            continue
        for k in range(1, n - 1):
            i = order[k]
            if dist[i] != math.inf:
                dist[i] += (pts[order[k + 1]][m] - pts[order[k - 1]][m]) / (hi - lo)
    return dist


HV_REFERENCE = (Fraction(1), Fraction(0))


def hypervolume2d_contribution(front: Sequence, ref=HV_REFERENCE) -> list:
    """Exclusive hypervolume of each point of a mutually nondominated front.

    The reference point is given in (fpr, tpr); a duplicated point
    contributes nothing.
    """
    pts = _points(front)
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            if _dominates(p, q) or _dominates(q, p):
                raise ValueError(f"front has a dominated member: {p} vs {q}")
    n = len(pts)
    order = sorted(range(n), key=lambda i: (pts[i], i))
    out = [0] * n
    for k, i in enumerate(order):
        right = pts[order[k + 1]][0] if k + 1 < n else ref[0]
        below = pts[order[k - 1]][1] if k > 0 else ref[1]
        out[i] = (right - pts[i][0]) * (pts[i][1] - below)
    return out


def _hv_contribution_lenient(pts: list, ref=HV_REFERENCE) -> list:
    # hull levels may carry a point sitting on an anchor, dominated by its
    # neighbour; such points contribute nothing
    keep = [i for i, p in enumerate(pts) if not any(_dominates(q, p) for q in pts)]
    sub = hypervolume2d_contribution([pts[i] for i in keep], ref)
    out = [0] * len(pts)
    for i, c in zip(keep, sub):
        out[i] = c
    return out


def _area_contribution(pts: list, anchors=(ORIGIN, CORNER)) -> list:
    chain = [anchors[0]] + pts + [anchors[1]]
    return removal_sequence(chain)[1][1:-1]


def moead_scalarize(v: ObjectiveVector, weight, ideal) -> float:
    """Tchebycheff value in the (fpr, 1 - tpr) minimisation orientation."""
    w1, w2 = weight
    return max(w1 * abs(float(v.fpr) - ideal[0]), w2 * abs(1.0 - float(v.tpr) - ideal[1]))


# --------------------------------------------------------------------------
# selector table

class SelectorKind(enum.Enum):
    """One row of the compared-algorithm table: (sorting, indicator, scheme)."""

    CH_NO_REDUNDANCY_AREA = ("CH-MOGP", "ch_no_redundancy", "area", "mu+mu")
    CH_NO_REDUNDANCY_AREA_MU1 = ("RCHH-EMOA", "ch_no_redundancy", "area", "mu+1")
    CH_HV_MU1 = ("CH-EMOA", "ch", "hypervolume", "mu+1")
    CH_NO_REDUNDANCY_CROWDING = ("CHCrowding", "ch_no_redundancy", "crowding", "mu+mu")
    CH_AREA_MU1 = ("CHH-MOGP", "ch", "area", "mu+1")
    NSGA2 = ("NSGA-II", "nondominated", "crowding", "mu+mu")
    SMS_EMOA = ("SMS-EMOA", "nondominated", "hypervolume", "mu+1")
    MOEAD = ("MOEA/D", "fitness", "fitness", "decomposition")

    def __init__(self, label, sorting, indicator, scheme):
        self.label = label
        self.sorting = sorting
        self.indicator = indicator
        self.scheme = scheme

    @property
    def is_convex_hull(self) -> bool:
        return self.sorting.startswith("ch")

    @classmethod
    def parse(cls, text: str) -> "SelectorKind":
        for kind in cls:
            if text in (kind.label, kind.name) or text.lower() == kind.label.lower():
                return kind
        raise ValueError(f"unknown selector {text!r}")


def sort_levels(pop: Sequence, sorting: str) -> LevelPartition:
    if sorting == "ch_no_redundancy":
        return ch_sort(pop, redundancy=False)
    if sorting == "ch":
        return ch_sort(pop, redundancy=True)
    if sorting == "nondominated":
        return LevelPartition(fast_nondominated_sort(pop))
    raise ValueError(f"no level sorting for {sorting!r}")


def _level_values(pts: list, anchors, indicator: str) -> list:
    if indicator == "area":
        return _area_contribution(pts, anchors)
    if indicator == "crowding":
        return crowding_distance(pts)
    if indicator == "hypervolume":
        return _hv_contribution_lenient(pts, (anchors[1][0], anchors[0][1]))
    raise ValueError(f"unknown indicator {indicator!r}")


def level_indicator(pop: Sequence, level: list[int], indicator: str) -> list:
    """Indicator value of each member of ``level`` (larger is better)."""
    pts, anchors, scale = roc_frame(pop)
    values = _level_values([pts[i] for i in level], anchors, indicator)
    if indicator == "crowding" or scale == 1:
        return values
    return [v if v == math.inf else v * scale for v in values]


def _trim_level(pts: list, anchors, level: list[int], k: int, indicator: str) -> list[int]:
    if k >= len(level):
        return list(level)
    lp = [pts[i] for i in level]
    if indicator == "area":
        order = removal_sequence([anchors[0]] + lp + [anchors[1]])[0]
        return [level[j - 1] for j in order[:k]]
    if indicator == "crowding":
        d = crowding_distance(lp)
        ranked = sorted(range(len(level)), key=lambda j: (d[j], level[j]))
        return [level[j] for j in ranked[:k]]
    if indicator == "hypervolume":
        ref = (anchors[1][0], anchors[0][1])
        left = list(range(len(level)))
        gone = []
        for _ in range(k):
            c = _hv_contribution_lenient([lp[j] for j in left], ref)
            worst = min(range(len(left)), key=lambda t: (c[t], level[left[t]]))
            gone.append(level[left.pop(worst)])
        return gone
    raise ValueError(f"unknown indicator {indicator!r}")


def discard_indices(pop: Sequence, n_remove: int, sorting: str, indicator: str, rng,
                    part: LevelPartition | None = None) -> list[int]:
    """Indices of the ``n_remove`` members a selector throws away.

    ``part`` may carry a partition of ``pop`` already computed by the caller.
    """
    if not 0 <= n_remove <= len(pop):
        raise ValueError(f"cannot remove {n_remove} of {len(pop)} individuals")
    if n_remove == 0:
        return []
    if part is None:
        part = sort_levels(pop, sorting)
    archive = part.redundant_archive
    if len(archive) >= n_remove:
        pick = rng.choice(len(archive), size=n_remove, replace=False)
        return [archive[int(j)] for j in sorted(pick)]
    gone = list(archive)
    for level in reversed(part.levels):
        deficit = n_remove - len(gone)
        if deficit == 0:
            break
        if len(level) <= deficit:
            gone.extend(level)
        else:
            pts, anchors, _ = roc_frame(pop)
            gone.extend(_trim_level(pts, anchors, level, deficit, indicator))
            break
    return gone


def reduce(pop: Sequence, n_remove: int, rng) -> list:
    """Drop ``n_remove`` members: duplicates first, then the worst hull
    levels, then the smallest area contributors of the boundary level."""
    gone = set(discard_indices(pop, n_remove, "ch_no_redundancy", "area", rng))
    return [x for i, x in enumerate(pop) if i not in gone]


def rank_population(pop: Sequence, sorting: str, indicator: str) -> list[tuple]:
    """Sort key per member for tournaments: lower is better."""
    part = sort_levels(pop, sorting)
    pts, anchors, _ = roc_frame(pop)
    rank = [None] * len(pop)
    for k, level in enumerate(part.levels):
        values = _level_values([pts[i] for i in level], anchors, indicator)
        for i, v in zip(level, values):
            rank[i] = (k, -v)
    worst = len(part.levels)
    for i in part.redundant_archive:
        rank[i] = (worst, 0)
    return rank
