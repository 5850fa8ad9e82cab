"""Job orchestration and result persistence.

``results.csv`` holds one row per (dataset, selector, repeat, fold,
checkpoint).  Rows are appended as jobs finish; the last column is a
completeness marker, so a line cut short by a crash is ignored on resume.
Once every job is done the table is rewritten in canonical order, which
makes it byte-identical for identical configs.  Wall-clock times live in
``timings.csv`` because they are not reproducible.
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
import yaml

from chmogp.data import load_dataset, stratified_kfold
from chmogp.engine import EngineConfig, run
from chmogp.experiments.config import RunConfig
from chmogp.selection import SelectorKind

log = logging.getLogger(__name__)

RESULT_FIELDS = ["dataset", "selector", "repeat", "fold", "ratio", "evaluations",
                 "generation", "train_auch", "test_auch", "hull_size", "status", "done"]
TIMING_FIELDS = ["dataset", "selector", "repeat", "fold", "wall_seconds"]
DONE = "1"


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from any printable parts."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class Job:
    dataset: str
    data: str
    schema: str
    selector: str
    repeat: int
    fold: int
    max_evaluations: int
    population_size: int
    folds: int
    repeats: int
    base_seed: int
    ratios: tuple

    @property
    def key(self) -> tuple:
        return (self.dataset, self.selector, self.repeat, self.fold)


def jobs_for(cfg: RunConfig) -> list[Job]:
    out = []
    for d in cfg.datasets:
        for s in cfg.selectors:
            for r in range(cfg.repeats):
                for f in range(cfg.folds):
                    out.append(Job(d.name, str(d.data), str(d.schema), s.label, r, f,
                                   d.max_evaluations, cfg.population_size, cfg.folds,
                                   cfg.repeats, cfg.base_seed, cfg.checkpoint_ratios))
    return out


@lru_cache(maxsize=8)
def _dataset(name: str, data: str, schema: str):
    return load_dataset(data, schema, name)


@lru_cache(maxsize=8)
def _plan(name: str, data: str, schema: str, folds: int, repeats: int, base_seed: int):
    rng = np.random.default_rng(derive_seed(base_seed, name, "folds"))
    return stratified_kfold(_dataset(name, data, schema), folds, repeats, rng)


def _fmt(x: float) -> str:
    return repr(float(x))


def run_job(job: Job) -> tuple[list[dict], float]:
    """Run one cell; returns its result rows and its wall time."""
    t0 = time.perf_counter()
    base = {"dataset": job.dataset, "selector": job.selector,
            "repeat": job.repeat, "fold": job.fold}
    try:
        ds = _dataset(job.dataset, job.data, job.schema)
        plan = _plan(job.dataset, job.data, job.schema, job.folds, job.repeats, job.base_seed)
        cfg = EngineConfig(
            max_evaluations=job.max_evaluations,
            selector=SelectorKind.parse(job.selector),
            population_size=job.population_size,
            rng_seed=derive_seed(job.base_seed, *job.key),
            checkpoint_ratios=job.ratios,
        )
        result = run(cfg, ds.subset(plan.train(job.repeat, job.fold)),
                     ds.subset(plan.test(job.repeat, job.fold)))
        rows = [
            dict(base, ratio=str(c.ratio), evaluations=c.evaluations, generation=c.generation,
                 train_auch=_fmt(c.train_auch), test_auch=_fmt(c.test_auch),
                 hull_size=c.hull_size, status="ok", done=DONE)
            for c in result.log.records
        ]
    except Exception as exc:  # recorded, the sweep goes on
        log.warning("job %s failed: %s", job.key, exc)
        msg = f"failed: {type(exc).__name__}: {exc}".replace("\n", " ")
        rows = [dict(base, ratio="", evaluations="", generation="", train_auch="",
                     test_auch="", hull_size="", status=msg, done=DONE)]
    return rows, time.perf_counter() - t0


# --------------------------------------------------------------------------
# persistence

def read_rows(path) -> list[dict]:
    """Complete rows of a results table; torn or unmarked lines are skipped."""
    path = Path(path)
    if not path.exists():
        return []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [row for row in reader if row.get("done") == DONE and None not in row]


def _row_key(row: dict) -> tuple:
    ratio = Fraction(row["ratio"]) if row["ratio"] else Fraction(-1)
    return (row["dataset"], row["selector"], int(row["repeat"]), int(row["fold"]), ratio)


def _write_table(path: Path, fields, rows) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(buf.getvalue(), encoding="utf-8")
    os.replace(tmp, path)


class _Appender:
    """Single writer for result and timing rows."""

    def __init__(self, out: Path):
        self.results = out / "results.csv"
        self.timings = out / "timings.csv"
        for path, fields in ((self.results, RESULT_FIELDS), (self.timings, TIMING_FIELDS)):
            if not path.exists() or path.stat().st_size == 0:
                path.write_text(",".join(fields) + "\n", encoding="utf-8")
            else:
                _terminate_torn_line(path)

    def add(self, job: Job, rows: list[dict], wall: float) -> None:
        with open(self.results, "a", newline="", encoding="utf-8") as fh:
            csv.DictWriter(fh, fieldnames=RESULT_FIELDS, lineterminator="\n").writerows(rows)
        with open(self.timings, "a", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerow([*job.key, f"{wall:.3f}"])


def _terminate_torn_line(path: Path) -> None:
    data = path.read_bytes()
    if data and not data.endswith(b"\n"):
        with open(path, "ab") as fh:
            fh.write(b"\n")


def completed_jobs(rows: list[dict], n_ratios: int) -> set:
    """Job keys whose rows are all on disk; failed jobs are retried."""
    counts: dict = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        key = (row["dataset"], row["selector"], int(row["repeat"]), int(row["fold"]))
        counts[key] = counts.get(key, 0) + 1
    return {k for k, c in counts.items() if c == n_ratios}


def finalize(out: Path, keep: set, n_ratios: int) -> list[dict]:
    """Rewrite results in canonical order, one copy per job."""
    rows = read_rows(out / "results.csv")
    done = completed_jobs(rows, n_ratios)
    chosen, seen = [], set()
    for row in rows:
        key = (row["dataset"], row["selector"], int(row["repeat"]), int(row["fold"]))
        if key not in keep:
            continue
        ok = row["status"] == "ok"
        if key in done and not ok:
            continue  # an older failure superseded by a later success
        tag = _row_key(row)
        if tag in seen:
            continue
        seen.add(tag)
        chosen.append(row)
    chosen.sort(key=_row_key)
    _write_table(out / "results.csv", RESULT_FIELDS, chosen)
    timings = {}
    with open(out / "timings.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if None in row or not row.get("wall_seconds"):
                continue
            timings[(row["dataset"], row["selector"], int(row["repeat"]), int(row["fold"]))] = row
    _write_table(out / "timings.csv", TIMING_FIELDS,
                 [timings[k] for k in sorted(timings) if k in keep])
    return chosen


@dataclass
class ExperimentReport:
    rows: list[dict]
    ran: int
    skipped: int
    failed: int
    out: Path


def run_experiment(cfg: RunConfig, progress=None) -> ExperimentReport:
    """Run every pending job of ``cfg`` and write the result tables."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(yaml.safe_dump(cfg.echo(), sort_keys=False), encoding="utf-8")
    n_ratios = len(cfg.checkpoint_ratios)
    appender = _Appender(out)
    jobs = jobs_for(cfg)
    done = completed_jobs(read_rows(appender.results), n_ratios)
    pending = [j for j in jobs if j.key not in done]
    failed = 0

    def record(job, rows, wall):
        nonlocal failed
        if rows[0]["status"] != "ok":
            failed += 1
        appender.add(job, rows, wall)
        if progress:
            progress(job, rows, wall)

    if cfg.workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for job, (rows, wall) in zip(pending, pool.map(run_job, pending)):
                record(job, rows, wall)
    else:
        for job in pending:
            record(job, *run_job(job))
    rows = finalize(out, {j.key for j in jobs}, n_ratios)
    return ExperimentReport(rows, len(pending), len(jobs) - len(pending), failed, out)
