"""Summaries, convergence curves and the two-sample rank-sum test."""
from __future__ import annotations

import enum
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

EXACT_MAX_N = 20


class Outcome(enum.Enum):
    A_WINS = "a_wins"
    B_WINS = "b_wins"
    DRAW = "draw"


@dataclass(frozen=True)
class RankSumResult:
    outcome: Outcome
    p_value: float
    u_statistic: float
    exact: bool


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j + 2) / 2
        i = j + 1
    return ranks


def _exact_p(doubled: list[int], n1: int, observed: int) -> float:
    # distribution of the doubled rank sum over all size-n1 subsets
    total_max = sum(sorted(doubled)[-n1:])
    dp = [[0] * (total_max + 1) for _ in range(n1 + 1)]
    dp[0][0] = 1
    for r in doubled:
        for k in range(n1, 0, -1):
            row, prev = dp[k], dp[k - 1]
            for s in range(total_max, r - 1, -1):
                if prev[s - r]:
                    row[s] += prev[s - r]
    counts = dp[n1]
    n_subsets = sum(counts)
    lo = sum(counts[: observed + 1])
    hi = sum(counts[observed:])
    return min(1.0, float(Fraction(2 * min(lo, hi), n_subsets)))


def _normal_p(ranks: list[float], n1: int, n2: int, u: float) -> float:
    n = n1 + n2
    ties = defaultdict(int)
    for r in ranks:
        ties[r] += 1
    tie_term = sum(t ** 3 - t for t in ties.values()) / (n * (n - 1))
    var = n1 * n2 / 12 * ((n + 1) - tie_term)
    if var <= 0:
        return 1.0
    mean = n1 * n2 / 2
    z = max(abs(u - mean) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def rank_sum_p(a: Sequence[float], b: Sequence[float]) -> tuple[float, float, bool]:
    """Two-sided p-value, the U statistic of ``a`` and whether it was exact."""
    n1, n2 = len(a), len(b)
    ranks = midranks(list(a) + list(b))
    r1 = sum(ranks[:n1])
    u = r1 - n1 * (n1 + 1) / 2
    if max(n1, n2) <= EXACT_MAX_N:
        doubled = [int(round(2 * r)) for r in ranks]
        return _exact_p(doubled, n1, sum(doubled[:n1])), u, True
    return _normal_p(ranks, n1, n2, u), u, False


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> RankSumResult:
    """Rank-sum (Mann-Whitney) comparison of two samples.

    A side wins only when the test is significant at ``alpha`` and its mean
    is the higher one.
    """
    if len(a) < 2 or len(b) < 2:
        raise ValueError("both samples need at least two values")
    p, u, exact = rank_sum_p(a, b)
    outcome = Outcome.DRAW
    if p <= alpha:
        ma, mb = statistics.fmean(a), statistics.fmean(b)
        if ma > mb:
            outcome = Outcome.A_WINS
        elif mb > ma:
            outcome = Outcome.B_WINS
    return RankSumResult(outcome, p, u, exact)


# --------------------------------------------------------------------------
# tables

def _ok(rows):
    return [r for r in rows if r.get("status") == "ok"]


def group_values(rows, column: str = "test_auch") -> dict:
    """``{(dataset, selector, ratio): [values]}`` over successful rows."""
    cells = defaultdict(list)
    for r in _ok(rows):
        cells[(r["dataset"], r["selector"], Fraction(r["ratio"]))].append(float(r[column]))
    return cells


@dataclass(frozen=True)
class Cell:
    mean: float
    std: float
    n: int

    def format(self) -> str:
        return f"{100 * self.mean:.2f} ± {100 * self.std:.2f}"


def describe(values: Sequence[float]) -> Cell | None:
    """Mean and sample standard deviation; ``None`` when fewer than two values."""
    if len(values) < 2:
        return None
    vals = sorted(values)  # order-independent float sums
    return Cell(statistics.fmean(vals), statistics.stdev(vals), len(vals))


def final_ratio(rows) -> Fraction | None:
    ratios = {Fraction(r["ratio"]) for r in _ok(rows)}
    return max(ratios) if ratios else None


def summarize(rows, ratio=None, column: str = "test_auch") -> dict:
    """``{(dataset, selector): Cell or None}`` at ``ratio`` (default: the last)."""
    ratio = final_ratio(rows) if ratio is None else Fraction(str(ratio))
    cells = group_values(rows, column)
    keys = sorted({(r["dataset"], r["selector"]) for r in rows})
    return {k: describe(cells.get((*k, ratio), [])) for k in keys}


def summary_table(rows, ratio=None) -> list[list[str]]:
    """Datasets down, selectors across, ``mean ± std`` (x100) in the cells."""
    summ = summarize(rows, ratio)
    datasets = sorted({d for d, _ in summ})
    selectors = sorted({s for _, s in summ})
    table = [["dataset", *selectors]]
    for d in datasets:
        line = [d]
        for s in selectors:
            cell = summ.get((d, s))
            line.append(cell.format() if cell else "absent")
        table.append(line)
    return table


def compare(rows, a: str, b: str, alpha: float = 0.05) -> list[dict]:
    """Win-draw-loss of selector ``a`` against ``b`` per checkpoint ratio."""
    cells = group_values(rows)
    datasets = sorted({d for d, s, _ in cells if s in (a, b)})
    ratios = sorted({r for _, s, r in cells if s in (a, b)})
    out = []
    for ratio in ratios:
        tally = {Outcome.A_WINS: 0, Outcome.DRAW: 0, Outcome.B_WINS: 0}
        for d in datasets:
            xa, xb = cells.get((d, a, ratio), []), cells.get((d, b, ratio), [])
            if len(xa) < 2 or len(xb) < 2:
                continue
            tally[wilcoxon_rank_sum(xa, xb, alpha).outcome] += 1
        out.append({"ratio": ratio, "wins": tally[Outcome.A_WINS],
                    "draws": tally[Outcome.DRAW], "losses": tally[Outcome.B_WINS]})
    return out


def curves(rows) -> list[dict]:
    """Mean train and test AUCH per (dataset, selector, ratio)."""
    test = group_values(rows, "test_auch")
    train = group_values(rows, "train_auch")
    out = []
    for key in sorted(test):
        d, s, ratio = key
        out.append({
            "dataset": d, "selector": s, "ratio": str(ratio),
            "mean_train_auch": repr(statistics.fmean(sorted(train[key]))),
            "mean_test_auch": repr(statistics.fmean(sorted(test[key]))),
            "n": len(test[key]),
        })
    return out
