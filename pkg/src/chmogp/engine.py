"""Evolutionary loops over genetic decision trees.

``run_chmogp`` is the (mu + mu) convex-hull loop: breed a full batch of
offspring, pool it with the parents and cut the pool back with
:func:`chmogp.selection.reduce`.  ``run_baseline`` drives every other
selector row (mu + mu, mu + 1 and MOEA/D) through the same budget
accounting, so all selectors spend exactly the same number of evaluations.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from chmogp import gdt
from chmogp.gdt import GdtNode, VariationRates
from chmogp.roc_core import DegenerateSplitError, auch, chain_area, upper_chain, upper_hull
from chmogp.selection import (
    ObjectiveVector,
    SelectorKind,
    roc_frame,
    discard_indices,
    moead_scalarize,
    rank_population,
    sort_levels,
)

log = logging.getLogger(__name__)

DEFAULT_CHECKPOINTS = tuple(Fraction(r) for r in ("1/15", "1/10", "1/4", "1/3", "1/2", "2/3", "1"))


@dataclass
class EngineConfig:
    max_evaluations: int
    selector: SelectorKind = SelectorKind.CH_NO_REDUNDANCY_AREA
    population_size: int = 20
    rates: VariationRates = field(default_factory=VariationRates)
    tournament_size: int = 4
    rng_seed: int = 0
    checkpoint_ratios: Sequence = DEFAULT_CHECKPOINTS
    moead_neighbors: int = 5
    init_depth: tuple = (2, gdt.INIT_MAX_DEPTH)

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.max_evaluations < self.population_size:
            raise ValueError("max_evaluations must be at least population_size")
        self.checkpoint_ratios = tuple(sorted(Fraction(r) for r in self.checkpoint_ratios))


@dataclass
class Individual:
    tree: GdtNode
    objectives: ObjectiveVector | None = None
    eval_stamp: str | None = None


@dataclass
class RunState:
    population: list
    evaluations_used: int = 0
    generation: int = 0


@dataclass(frozen=True)
class Checkpoint:
    ratio: Fraction
    evaluations: int
    generation: int
    train_auch: float
    test_auch: float
    hull_size: int


@dataclass
class ConvergenceLog:
    records: list = field(default_factory=list)
    # (evaluations, train AUCH, level 0 of the pool was cut) per generation
    history: list = field(default_factory=list)

    @property
    def trimmed_generations(self) -> int:
        return sum(1 for *_, cut in self.history if cut)


@dataclass
class RunResult:
    population: list
    log: ConvergenceLog
    evaluations_used: int
    generations: int


class BudgetExhausted(RuntimeError):
    pass


class Evaluator:
    """Training-split fitness with a hard evaluation budget."""

    def __init__(self, split, budget: int, stamp: str = "train"):
        y = np.asarray(split.y)
        if y.min() == y.max():
            raise DegenerateSplitError("training split needs both classes")
        self.split = split
        self.budget = budget
        self.used = 0
        self.stamp = stamp

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def __call__(self, tree: GdtNode) -> Individual:
        if self.used >= self.budget:
            raise BudgetExhausted("evaluation budget exhausted")
        self.used += 1
        counts = gdt.evaluate(tree, self.split)
        return Individual(tree, ObjectiveVector.from_counts(counts), self.stamp)


def population_auch(points) -> tuple[float, int]:
    """AUCH and hull size of ROC points or objective vectors."""
    pts, (lo, hi), scale = roc_frame(points)
    if scale == 1:
        hull = upper_hull(pts)
        return auch(hull), len(hull.interior)
    chain = upper_chain(pts, lo, hi)
    return float(chain_area(chain) * scale), len(chain) - 2


def tournament_select(pop: Sequence, k: int, rng, rank=None):
    """Best of ``k`` members drawn with replacement; lower rank wins, ties to
    the earlier draw."""
    best = None
    for _ in range(k):
        i = int(rng.integers(len(pop)))
        if best is None or (rank is not None and rank[i] < rank[best]):
            best = i
    return pop[best]


def make_offspring(pop, rank, n: int, schema, rates: VariationRates, rng, evaluate: Evaluator,
                   tournament_size: int = 4) -> list[Individual]:
    """Breed ``n`` evaluated offspring, truncated at the remaining budget."""
    out = []
    for _ in range(min(n, evaluate.remaining)):
        p1 = tournament_select(pop, tournament_size, rng, rank)
        p2 = tournament_select(pop, tournament_size, rng, rank)
        out.append(evaluate(gdt.vary(p1.tree, p2.tree, schema, rates, rng)))
    return out


class _Recorder:
    def __init__(self, cfg: EngineConfig, test):
        self.cfg = cfg
        self.test = test
        self.pending = list(cfg.checkpoint_ratios)
        self.log = ConvergenceLog()

    def generation_done(self, pop, used: int, generation: int, cut: bool = False) -> None:
        train, hull_size = population_auch([ind.objectives for ind in pop])
        self.log.history.append((used, train, cut))
        while self.pending and used >= self.pending[0] * self.cfg.max_evaluations:
            ratio = self.pending.pop(0)
            self.log.records.append(
                Checkpoint(ratio, used, generation, train, self._test_auch(pop), hull_size)
            )

    def finish(self, pop, used: int, generation: int) -> None:
        if self.pending:
            train, hull_size = population_auch([ind.objectives for ind in pop])
            test = self._test_auch(pop)
            for ratio in self.pending:
                self.log.records.append(Checkpoint(ratio, used, generation, train, test, hull_size))
            self.pending = []

    def _test_auch(self, pop) -> float:
        if self.test is None:
            return float("nan")
        pts = [ObjectiveVector.from_counts(gdt.evaluate(ind.tree, self.test)) for ind in pop]
        return population_auch(pts)[0]


def _check_splits(train, test) -> None:
    for name, split in (("training", train), ("test", test)):
        if split is None:
            continue
        y = np.asarray(split.y)
        if len(y) == 0 or y.min() == y.max():
            raise DegenerateSplitError(f"{name} split needs both classes")


def _schema(split, schema):
    schema = schema if schema is not None else getattr(split, "schema", None)
    if schema is None:
        raise ValueError("a dataset schema is required to build trees")
    return schema


def _initial_population(cfg, schema, rng, evaluate) -> list[Individual]:
    lo, hi = cfg.init_depth
    trees = gdt.ramped_half_and_half(cfg.population_size, schema, rng, lo, hi)
    return [evaluate(t) for t in trees]


def _run_levels(cfg: EngineConfig, train, test, schema) -> RunResult:
    kind = cfg.selector
    rng = np.random.default_rng(cfg.rng_seed)
    evaluate = Evaluator(train, cfg.max_evaluations)
    rec = _Recorder(cfg, test)
    mu = cfg.population_size
    batch = mu if kind.scheme == "mu+mu" else 1

    pop = _initial_population(cfg, schema, rng, evaluate)
    generation = 0
    rec.generation_done(pop, evaluate.used, generation)
    while evaluate.remaining > 0:
        rank = rank_population([p.objectives for p in pop], kind.sorting, kind.indicator)
        kids = make_offspring(pop, rank, batch, schema, cfg.rates, rng, evaluate, cfg.tournament_size)
        pool = pop + kids
        objs = [p.objectives for p in pool]
        part = sort_levels(objs, kind.sorting)
        gone = set(discard_indices(objs, len(kids), kind.sorting, kind.indicator, rng, part))
        cut = any(i in gone for i in part.levels[0])
        pop = [p for i, p in enumerate(pool) if i not in gone]
        generation += 1
        rec.generation_done(pop, evaluate.used, generation, cut)
    rec.finish(pop, evaluate.used, generation)
    return RunResult(pop, rec.log, evaluate.used, generation)


def _moead_weights(mu: int) -> list[tuple[float, float]]:
    return [(i / (mu - 1), 1.0 - i / (mu - 1)) for i in range(mu)]


def _run_moead(cfg: EngineConfig, train, test, schema) -> RunResult:
    rng = np.random.default_rng(cfg.rng_seed)
    evaluate = Evaluator(train, cfg.max_evaluations)
    rec = _Recorder(cfg, test)
    mu = cfg.population_size
    weights = _moead_weights(mu)
    t = min(cfg.moead_neighbors, mu)
    hood = [sorted(range(mu), key=lambda j: (abs(weights[i][0] - weights[j][0]), j))[:t]
            for i in range(mu)]

    pop = _initial_population(cfg, schema, rng, evaluate)
    ideal = [min(float(p.objectives.fpr) for p in pop), min(1.0 - float(p.objectives.tpr) for p in pop)]
    generation = 0
    rec.generation_done(pop, evaluate.used, generation)
    while evaluate.remaining > 0:
        for i in range(mu):
            if evaluate.remaining == 0:
                break
            members = [pop[j] for j in hood[i]]
            rank = [moead_scalarize(m.objectives, weights[i], ideal) for m in members]
            p1 = tournament_select(members, cfg.tournament_size, rng, rank)
            p2 = tournament_select(members, cfg.tournament_size, rng, rank)
            child = evaluate(gdt.vary(p1.tree, p2.tree, schema, cfg.rates, rng))
            ideal[0] = min(ideal[0], float(child.objectives.fpr))
            ideal[1] = min(ideal[1], 1.0 - float(child.objectives.tpr))
            for j in hood[i]:
                w = weights[j]
                if moead_scalarize(child.objectives, w, ideal) < moead_scalarize(pop[j].objectives, w, ideal):
                    pop[j] = child
        generation += 1
        rec.generation_done(pop, evaluate.used, generation)
    rec.finish(pop, evaluate.used, generation)
    return RunResult(pop, rec.log, evaluate.used, generation)


def run_chmogp(config: EngineConfig, train_split, test_split=None, schema=None) -> RunResult:
    """Convex-hull loop; ``config.selector`` must be a convex-hull row."""
    if not config.selector.is_convex_hull:
        raise ValueError(f"{config.selector.label} is not a convex-hull selector")
    _check_splits(train_split, test_split)
    return _run_levels(config, train_split, test_split, _schema(train_split, schema))


def run_baseline(config: EngineConfig, train_split, test_split=None, schema=None) -> RunResult:
    schema = _schema(train_split, schema)
    _check_splits(train_split, test_split)
    if config.selector is SelectorKind.MOEAD:
        return _run_moead(config, train_split, test_split, schema)
    return _run_levels(config, train_split, test_split, schema)


def run(config: EngineConfig, train_split, test_split=None, schema=None) -> RunResult:
    """Dispatch on ``config.selector``."""
    if config.selector.is_convex_hull:
        return run_chmogp(config, train_split, test_split, schema)
    return run_baseline(config, train_split, test_split, schema)
