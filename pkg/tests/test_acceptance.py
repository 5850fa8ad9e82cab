"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The desk-scale reproduction (criteria 6 and 7) runs 10,000 evaluations per
run, 5 folds x 4 repeats, on every shipped dataset; expect about ten
minutes on one core.
"""
import itertools
import random
import statistics
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

from acceptance_log import verdict
from chmogp.engine import EngineConfig, run
from chmogp.data import load_dataset, stratified_kfold
from chmogp.experiments.config import config_from_dict
from chmogp.experiments.runner import run_experiment
from chmogp.experiments.stats import rank_sum_p
from chmogp.roc_core import RocHull, auch, delta_area, triangle_contribution, upper_hull
from chmogp.selection import (
    ObjectiveVector,
    SelectorKind,
    ch_sort_no_redundancy,
    discard_indices,
    fast_nondominated_sort,
)
from oracles import brute_delta_area, brute_fronts, brute_hull, brute_ranksum_p

DATA = Path(__file__).resolve().parent.parent / "data"
DESK_DATASETS = ("bcw", "monks-3", "transfusion")
DESK_SELECTORS = ("CH-MOGP", "NSGA-II", "MOEA/D")


def rand_point(rnd, den=20):
    return (F(rnd.randint(0, den), den), F(rnd.randint(0, den), den))


# 1 --------------------------------------------------------------------------

def test_c01_hull_oracle_equivalence():
    rnd = random.Random(1)
    sets = [[rand_point(rnd, rnd.choice((4, 10, 20, 97))) for _ in range(rnd.randint(0, 12))]
            for _ in range(1000)]
    t0 = time.perf_counter()
    mismatches = sum(list(upper_hull(s)) != brute_hull(s) for s in sets)
    elapsed = time.perf_counter() - t0
    verdict(1, "hull oracle equivalence", mismatches == 0 and elapsed < 5,
            f"{mismatches} mismatches over 1000 sets in {elapsed:.2f}s (limit 5s)")


# 2 --------------------------------------------------------------------------

def _convex_chain(rnd):
    # points on y = 1 - (1 - x)^2 are strictly concave, so all are hull members
    k = rnd.randint(1, 10)
    xs = sorted({F(rnd.randint(1, 999), 1000) for _ in range(k)})
    return [(F(0), F(0))] + [(x, 1 - (1 - x) ** 2) for x in xs] + [(F(1), F(1))]


def test_c02_delta_area_consistency():
    rnd = random.Random(2)
    t0 = time.perf_counter()
    worst, mismatches = 0.0, 0
    for _ in range(500):
        chain = _convex_chain(rnd)
        assert list(upper_hull(chain[1:-1])) == chain
        whole = auch(RocHull(tuple(chain)))
        for k in range(1, len(chain) - 1):
            loss = whole - auch(upper_hull(chain[1:k] + chain[k + 1:-1]))
            tri = float(triangle_contribution(chain[k - 1], chain[k], chain[k + 1]))
            worst = max(worst, abs(loss - tri))
        mismatches += delta_area(chain) != brute_delta_area(chain)
    elapsed = time.perf_counter() - t0
    verdict(2, "delta-area consistency", worst <= 1e-12 and mismatches == 0 and elapsed < 5,
            f"max |loss - triangle| = {worst:.2e} (limit 1e-12), "
            f"{mismatches} incremental/recompute mismatches, {elapsed:.2f}s (limit 5s)")


# 3 --------------------------------------------------------------------------

def _population(rnd):
    n, p = rnd.choice(((10, 10), (12, 7), (30, 20)))
    base = [ObjectiveVector(rnd.randint(0, n), n, rnd.randint(0, p), p)
            for _ in range(rnd.randint(1, 30))]
    pop = base + [rnd.choice(base) for _ in range(rnd.randint(0, 40 - len(base)))]
    rnd.shuffle(pop)
    return pop


def test_c03_sorting_properties():
    rnd = random.Random(3)
    t0 = time.perf_counter()
    failures = []
    for trial in range(500):
        pop = _population(rnd)
        part = ch_sort_no_redundancy(pop)
        members = [i for lvl in part.levels for i in lvl] + part.redundant_archive
        if sorted(members) != list(range(len(pop))):
            failures.append((trial, "totality"))
        first = {}
        for i, v in enumerate(pop):
            first.setdefault(v, i)
        if any(first[pop[i]] == i for i in part.redundant_archive) or \
                sorted(first.values()) != sorted(i for lvl in part.levels for i in lvl):
            failures.append((trial, "archiving"))
        hull = set(upper_hull([v.point for v in first]).interior)
        if hull and not all(pop[i].point in hull | {(0, 0), (1, 1)} for i in part.levels[0]):
            failures.append((trial, "level-0 soundness"))
        if [set(f) for f in fast_nondominated_sort(pop)] != brute_fronts([v.point for v in pop]):
            failures.append((trial, "nondominated sort"))
    elapsed = time.perf_counter() - t0
    verdict(3, "sorting properties", not failures and elapsed < 10,
            f"{len(failures)} violations over 500 populations {failures[:3]}, {elapsed:.2f}s (limit 10s)")


# 4 --------------------------------------------------------------------------

def test_c04_discriminating_case():
    a, b, c = ObjectiveVector.of(0.1, 0.5), ObjectiveVector.of(0.4, 0.6), ObjectiveVector.of(0.6, 0.9)
    # b lies strictly below the segment a-c
    below = (c.fpr - a.fpr) * (b.tpr - a.tpr) < (c.tpr - a.tpr) * (b.fpr - a.fpr)
    nds = fast_nondominated_sort([a, b, c])
    part = ch_sort_no_redundancy([a, b, c])
    ok = below and nds == [[0, 1, 2]] and part.levels[0] == [0, 2] and 1 not in part.levels[0]
    verdict(4, "discriminating case", ok,
            f"nondominated fronts {nds}, convex-hull levels {part.levels}")


# 5 --------------------------------------------------------------------------

def test_c05_reduce_contract():
    rnd = random.Random(5)
    size_errors = hull_losses = 0
    for _ in range(1000):
        pop = _population(rnd)
        n = rnd.randint(0, len(pop))
        part = ch_sort_no_redundancy(pop)
        gone = discard_indices(pop, n, "ch_no_redundancy", "area", np.random.default_rng(rnd.getrandbits(32)))
        size_errors += len(set(gone)) != n
        spare = len(part.redundant_archive) + sum(len(lvl) for lvl in part.levels[1:])
        if n <= spare:
            hull_losses += bool(set(part.levels[0]) & set(gone))
    grid = [ObjectiveVector(f, 2, t, 2) for f in range(3) for t in range(3)]
    branch_cases = branch_errors = 0
    for size in range(2, 7):
        for combo in itertools.combinations_with_replacement(range(len(grid)), size):
            pop = [grid[i] for i in combo]
            archive = set(ch_sort_no_redundancy(pop).redundant_archive)
            for n in range(1, len(archive) + 1):
                branch_cases += 1
                gone = discard_indices(pop, n, "ch_no_redundancy", "area", np.random.default_rng(n))
                if len(gone) != n or not set(gone) <= archive:
                    branch_errors += 1
    ok = size_errors == 0 and hull_losses == 0 and branch_errors == 0
    verdict(5, "reduce contract", ok,
            f"size errors {size_errors}/1000, level-0 losses {hull_losses}, "
            f"archive-first branch errors {branch_errors}/{branch_cases}")


# 6, 7 -----------------------------------------------------------------------

@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    present = [d for d in DESK_DATASETS if (DATA / f"{d}.data").exists()]
    raw = {
        "output_dir": str(tmp_path_factory.mktemp("desk")),
        "datasets": [{"name": d, "data": str(DATA / f"{d}.data"), "schema": str(DATA / f"{d}.schema")}
                     for d in present],
        "selectors": list(DESK_SELECTORS),
        "budget": 10000,
        "population_size": 20,
        "folds": 5,
        "repeats": 4,
        "base_seed": 2024,
    }
    cfg = config_from_dict(raw)
    report = run_experiment(cfg)
    finals = {}
    for r in report.rows:
        if r["status"] == "ok" and F(r["ratio"]) == 1:
            finals.setdefault((r["dataset"], r["selector"]), []).append(float(r["test_auch"]))
    walls = []
    with open(Path(cfg.output_dir) / "timings.csv") as fh:
        next(fh)
        walls = [float(line.rsplit(",", 1)[1]) for line in fh]
    return {"means": {k: statistics.fmean(v) for k, v in finals.items()},
            "counts": {k: len(v) for k, v in finals.items()},
            "walls": walls, "failed": report.failed, "present": present}


def test_c06_desk_scale_reproduction(desk):
    m, counts = desk["means"], desk["counts"]
    bcw = m.get(("bcw", "CH-MOGP"), float("nan"))
    monks = m.get(("monks-3", "CH-MOGP"), float("nan"))
    slowest = max(desk["walls"])
    runs_ok = counts.get(("bcw", "CH-MOGP")) == 20 and counts.get(("monks-3", "CH-MOGP")) == 20
    ok = runs_ok and bcw >= 0.95 and monks >= 0.97 and slowest < 60 and desk["failed"] == 0
    verdict(6, "desk-scale reproduction", ok,
            f"CH-MOGP mean test AUCH bcw {bcw:.4f} (>= 0.95), monks-3 {monks:.4f} (>= 0.97), "
            f"slowest run {slowest:.1f}s (< 60s), 20 runs each")


def test_c07_relative_ordering(desk):
    m = desk["means"]
    beats_moead, close_to_nsga, parts = 0, 0, []
    for d in DESK_DATASETS:
        if d not in desk["present"]:
            parts.append(f"{d}: data file not available")
            continue
        ch, nsga, moead = (m[(d, s)] for s in DESK_SELECTORS)
        beats_moead += ch > moead
        close_to_nsga += abs(ch - nsga) <= 0.02
        parts.append(f"{d}: CH-MOGP {ch:.4f}, NSGA-II {nsga:.4f}, MOEA/D {moead:.4f}")
    ok = beats_moead >= 2 and close_to_nsga == len(DESK_DATASETS)
    verdict(7, "relative ordering", ok,
            f"beats MOEA/D on {beats_moead}/3 (need 2), within 0.02 of NSGA-II on "
            f"{close_to_nsga}/3 (need 3); " + "; ".join(parts))


# 8 --------------------------------------------------------------------------

def _sample_with_u(n, u):
    ranks = list(range(1, n + 1))
    need = u
    for k in range(n - 1, -1, -1):
        step = min(2 * n - (n - 1 - k) - ranks[k], need)
        ranks[k] += step
        need -= step
    return [float(r) for r in ranks], [float(r) for r in range(1, 2 * n + 1) if r not in ranks]


def test_c08_wilcoxon_correctness():
    rnd = random.Random(8)
    worst, checked = 0.0, 0
    for n1, n2 in itertools.product(range(2, 9), repeat=2):
        for trial in range(2):
            pool = [0.1, 0.2, 0.3, 0.4] if trial else None
            a = [rnd.choice(pool) if pool else round(rnd.random(), 3) for _ in range(n1)]
            b = [rnd.choice(pool) if pool else round(rnd.random() + 0.15, 3) for _ in range(n2)]
            worst = max(worst, abs(rank_sum_p(a, b)[0] - brute_ranksum_p(a, b)))
            checked += 1
    critical = []
    for n, u_crit in ((10, 23), (20, 127)):
        p_in = rank_sum_p(*_sample_with_u(n, u_crit))[0]
        p_out = rank_sum_p(*_sample_with_u(n, u_crit + 1))[0]
        critical.append(p_in <= 0.05 < p_out)
    ok = worst < 1e-12 and all(critical)
    verdict(8, "Wilcoxon correctness", ok,
            f"max |p - enumeration| = {worst:.1e} over {checked} sample pairs (n <= 8); "
            f"critical U 23 (n=10) and 127 (n=20) reproduced: {critical}")


# 9 --------------------------------------------------------------------------

def test_c09_determinism(tmp_path):
    outputs = []
    for name in ("first", "second"):
        raw = {
            "output_dir": str(tmp_path / name),
            "datasets": [{"name": d, "data": str(DATA / f"{d}.data"), "schema": str(DATA / f"{d}.schema")}
                         for d in ("bcw", "monks-3")],
            "selectors": ["CH-MOGP", "SMS-EMOA", "MOEA/D"],
            "budget": 300,
            "folds": 5,
            "repeats": 1,
            "base_seed": 99,
        }
        run_experiment(config_from_dict(raw))
        outputs.append((tmp_path / name / "results.csv").read_bytes())
    verdict(9, "determinism", outputs[0] == outputs[1] and len(outputs[0]) > 0,
            f"results.csv byte-identical across two runs ({len(outputs[0])} bytes)")


# 10 -------------------------------------------------------------------------

def test_c10_budget_fairness():
    ds = load_dataset(DATA / "bcw.data", DATA / "bcw.schema")
    plan = stratified_kfold(ds, 5, 1, np.random.default_rng(10))
    train, test = ds.subset(plan.train(0, 0)), ds.subset(plan.test(0, 0))
    worst = 0
    for kind in SelectorKind:
        for budget in (500, 1013):
            res = run(EngineConfig(budget, kind, rng_seed=budget), train, test)
            worst = max(worst, abs(res.evaluations_used - budget))
    verdict(10, "budget fairness", worst < 20,
            f"max |evaluations_used - max_evaluations| = {worst} over 8 selectors x 2 budgets (limit < 20)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
