"""Experiment configuration.

A run config is a YAML mapping::

    output_dir: results/desk          # relative to the config file
    datasets:
      - name: bcw
        data: ../data/bcw.data
        schema: ../data/bcw.schema
        max_evaluations: 10000        # optional per-dataset override
    selectors: [CH-MOGP, NSGA-II, MOEA/D]
    budget: table3                    # preset name or an integer for every dataset
    population_size: 20
    folds: 5
    repeats: 20
    base_seed: 0
    workers: 1
    checkpoint_ratios: [1/15, 1/10, 1/4, 1/3, 1/2, 2/3, 1]

Every dataset needs a budget.  The per-dataset ``max_evaluations`` wins,
then an integer ``budget``, then the named preset.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from chmogp.engine import DEFAULT_CHECKPOINTS
from chmogp.selection import SelectorKind

# evaluation budgets per dataset, population 20
TABLE3 = {
    "australian": 100000, "bands": 150000, "bcw": 50000, "crx": 50000,
    "german": 200000, "house-votes": 30000, "ionosphere": 80000, "kr-vs-kp": 200000,
    "mammographic": 60000, "monks-1": 200000, "monks-2": 1000000, "monks-3": 40000,
    "parkinsons": 30000, "pima": 80000, "sonar": 30000, "spect": 40000,
    "tic-tac-toe": 300000, "transfusion": 22000, "wdbc": 30000, "adult": 10000,
    "magic04": 10000, "skin": 10000,
}

# evaluation budgets used with population 100
TABLE8 = {
    "australian": 100000, "bands": 1500000, "bcw": 18500, "crx": 450000,
    "german": 120000, "house-votes": 24000, "ionosphere": 80000, "kr-vs-kp": 2000000,
    "mammographic": 80000, "monks-1": 230000, "monks-2": 10000000, "monks-3": 190000,
    "parkinsons": 42000, "pima": 180000, "sonar": 12000, "spect": 10000,
    "tic-tac-toe": 3000000, "transfusion": 35000, "wdbc": 21000, "adult": 300000,
    "magic04": 40000, "skin": 30000,
}

BUDGET_PRESETS = {"table3": TABLE3, "table8": TABLE8}


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    data: Path
    schema: Path
    max_evaluations: int


@dataclass
class RunConfig:
    datasets: list[DatasetEntry]
    selectors: list[SelectorKind]
    output_dir: Path
    population_size: int = 20
    folds: int = 5
    repeats: int = 20
    base_seed: int = 0
    workers: int = 1
    checkpoint_ratios: tuple = DEFAULT_CHECKPOINTS
    source: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.datasets:
            raise ValueError("config lists no datasets")
        if not self.selectors:
            raise ValueError("config lists no selectors")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ValueError("dataset names must be unique")
        labels = [s.label for s in self.selectors]
        if len(set(labels)) != len(labels):
            raise ValueError("selectors must be unique")
        for d in self.datasets:
            for p in (d.data, d.schema):
                if not Path(p).is_file():
                    raise FileNotFoundError(f"dataset {d.name}: {p} not found")
            if d.max_evaluations < self.population_size:
                raise ValueError(f"dataset {d.name}: budget below population size")
        if self.folds < 2 or self.repeats < 1 or self.workers < 1:
            raise ValueError("folds >= 2, repeats >= 1 and workers >= 1 required")
        self.checkpoint_ratios = tuple(sorted(Fraction(str(r)) for r in self.checkpoint_ratios))
        if not all(0 < r <= 1 for r in self.checkpoint_ratios):
            raise ValueError("checkpoint ratios must lie in (0, 1]")

    def echo(self) -> dict:
        """Plain-data view written next to the results."""
        return {
            "datasets": [
                {"name": d.name, "data": str(d.data), "schema": str(d.schema),
                 "max_evaluations": d.max_evaluations}
                for d in self.datasets
            ],
            "selectors": [s.label for s in self.selectors],
            "population_size": self.population_size,
            "folds": self.folds,
            "repeats": self.repeats,
            "base_seed": self.base_seed,
            "checkpoint_ratios": [str(r) for r in self.checkpoint_ratios],
        }


def _budget(name: str, entry: dict, budget) -> int:
    if "max_evaluations" in entry:
        return int(entry["max_evaluations"])
    if isinstance(budget, int):
        return budget
    if isinstance(budget, str):
        if budget not in BUDGET_PRESETS:
            raise ValueError(f"unknown budget preset {budget!r}")
        table = BUDGET_PRESETS[budget]
        if name not in table:
            raise ValueError(f"preset {budget!r} has no budget for {name!r}")
        return table[name]
    raise ValueError(f"dataset {name!r} has no budget")


def config_from_dict(raw: dict, base: Path = Path(".")) -> RunConfig:
    base = Path(base)

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    known = {"datasets", "selectors", "output_dir", "budget", "population_size", "folds",
             "repeats", "base_seed", "workers", "checkpoint_ratios"}
    extra = set(raw) - known
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    budget = raw.get("budget", "table3")
    datasets = []
    for entry in raw.get("datasets") or []:
        if isinstance(entry, str):
            entry = {"name": entry}
        name = entry["name"]
        datasets.append(DatasetEntry(
            name,
            resolve(entry.get("data", f"{name}.data")),
            resolve(entry.get("schema", f"{name}.schema")),
            _budget(name, entry, budget),
        ))
    return RunConfig(
        datasets=datasets,
        selectors=[SelectorKind.parse(str(s)) for s in raw.get("selectors") or []],
        output_dir=resolve(raw.get("output_dir", "results")),
        population_size=int(raw.get("population_size", 20)),
        folds=int(raw.get("folds", 5)),
        repeats=int(raw.get("repeats", 20)),
        base_seed=int(raw.get("base_seed", 0)),
        workers=int(raw.get("workers", 1)),
        checkpoint_ratios=tuple(raw.get("checkpoint_ratios", DEFAULT_CHECKPOINTS)),
        source=dict(raw),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    raw = yaml.safe_load(path.read_text()) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected a mapping")
    return config_from_dict(raw, path.parent)
