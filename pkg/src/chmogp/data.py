"""Dataset loading and stratified repeated cross-validation.

A dataset is a delimited text file plus a small schema file of ``key = value``
lines::

    # UCI breast-cancer-wisconsin layout
    delimiter = comma        # comma | whitespace
    header = no
    label = 10               # 0-based column index, negative counts from the end
    positive = 4             # label token(s) of the positive class
    negative = 2             # label token(s) of the negative class
    missing = ?
    ignore = 0               # columns dropped on load (ids)
    categorical = 3, 5       # feature columns holding category codes

Columns that are neither label, ignored nor categorical are numeric.  Missing
numeric values get the column median and missing categorical values the
column mode, both computed over the whole file.
"""
from __future__ import annotations

import csv
import statistics
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str  # "numeric" or "categorical"
    low: float = 0.0
    high: float = 0.0
    codes: tuple = ()


@dataclass(frozen=True)
class SchemaSpec:
    label: int
    positive: tuple
    negative: tuple
    delimiter: str = "comma"
    header: bool = False
    missing: tuple = ("?",)
    ignore: tuple = ()
    categorical: tuple = ()


@dataclass(frozen=True)
class DatasetSchema:
    attributes: tuple
    label_column: int
    positive: tuple


@dataclass(eq=False)
class Split:
    """Rows of a dataset with labels (1 = positive)."""

    X: np.ndarray
    y: np.ndarray
    schema: DatasetSchema | None = None
    columns: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.columns = np.ascontiguousarray(self.X.T)

    def __len__(self):
        return len(self.y)

    @property
    def positives(self) -> int:
        return int(self.y.sum())


@dataclass(eq=False)
class Dataset:
    name: str
    X: np.ndarray
    y: np.ndarray
    schema: DatasetSchema

    def __len__(self):
        return len(self.y)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.schema == other.schema
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    def class_counts(self) -> tuple[int, int]:
        pos = int(self.y.sum())
        return pos, len(self.y) - pos

    def subset(self, idx) -> Split:
        idx = np.asarray(idx)
        return Split(self.X[idx], self.y[idx], self.schema)


def _tokens(value: str) -> tuple:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def parse_schema(text: str) -> SchemaSpec:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"schema line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        kv[key] = value
    for key in ("label", "positive", "negative"):
        if key not in kv:
            raise ValueError(f"schema is missing '{key}'")
    delimiter = kv.get("delimiter", "comma")
    if delimiter not in ("comma", "whitespace"):
        raise ValueError(f"unknown delimiter {delimiter!r}")
    return SchemaSpec(
        label=int(kv["label"]),
        positive=_tokens(kv["positive"]),
        negative=_tokens(kv["negative"]),
        delimiter=delimiter,
        header=kv.get("header", "no").lower() in ("yes", "true", "1"),
        missing=_tokens(kv.get("missing", "?")),
        ignore=tuple(int(v) for v in _tokens(kv.get("ignore", ""))),
        categorical=tuple(int(v) for v in _tokens(kv.get("categorical", ""))),
    )


def load_schema(path) -> SchemaSpec:
    return parse_schema(Path(path).read_text())


def _rows(path: Path, spec: SchemaSpec):
    with open(path, newline="") as fh:
        if spec.delimiter == "comma":
            reader = ((i, [c.strip() for c in row]) for i, row in enumerate(csv.reader(fh), 1))
        else:
            reader = ((i, line.split()) for i, line in enumerate(fh, 1))
        for lineno, row in reader:
            if not row or all(c == "" for c in row):
                continue
            if spec.header and lineno == 1:
                continue
            yield lineno, row


def _as_number(tok: str):
    try:
        return float(tok)
    except ValueError:
        return None


def load_dataset(path, schema_spec, name: str | None = None) -> Dataset:
    """Parse a delimited file into a :class:`Dataset`.

    ``schema_spec`` is a :class:`SchemaSpec` or a path to a schema file.
    """
    path = Path(path)
    spec = schema_spec if isinstance(schema_spec, SchemaSpec) else load_schema(schema_spec)
    raw, labels, width = [], [], None
    for lineno, row in _rows(path, spec):
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(f"{path}:{lineno}: expected {width} columns, found {len(row)}")
        tok = row[spec.label]
        if tok in spec.positive:
            labels.append(1)
        elif tok in spec.negative:
            labels.append(0)
        else:
            raise ValueError(f"{path}:{lineno}: unknown label token {tok!r}")
        raw.append((lineno, row))
    if not raw:
        raise ValueError(f"{path}: no data rows")
    label_col = spec.label % width
    ignored = {c % width for c in spec.ignore}
    categorical = {c % width for c in spec.categorical}
    feature_cols = [c for c in range(width) if c != label_col and c not in ignored]
    if not feature_cols:
        raise ValueError(f"{path}: no feature columns")

    attributes, columns = [], []
    for c in feature_cols:
        cells = [(lineno, row[c]) for lineno, row in raw]
        present = [(ln, t) for ln, t in cells if t not in spec.missing]
        if c in categorical:
            numeric = all(_as_number(t) is not None for _, t in present)
            distinct = sorted({t for _, t in present}, key=(lambda t: float(t)) if numeric else None)
            code = {t: (float(t) if numeric else float(i)) for i, t in enumerate(distinct)}
            counts = Counter(code[t] for _, t in present)
            fill = min(counts, key=lambda v: (-counts[v], v))
            values = [fill if t in spec.missing else code[t] for _, t in cells]
            codes = tuple(sorted(code.values()))
            attributes.append(Attribute(f"x{len(attributes)}", "categorical", codes[0], codes[-1], codes))
        else:
            nums = []
            for ln, t in present:
                v = _as_number(t)
                if v is None:
                    raise ValueError(f"{path}:{ln}: column {c} value {t!r} is not numeric")
                nums.append(v)
            if not nums:
                raise ValueError(f"{path}: column {c} has no values")
            fill = float(statistics.median(nums))
            it = iter(nums)
            values = [fill if t in spec.missing else next(it) for _, t in cells]
            attributes.append(Attribute(f"x{len(attributes)}", "numeric", min(values), max(values)))
        columns.append(values)

    y = np.asarray(labels, dtype=np.int8)
    if y.min() == y.max():
        raise ValueError(f"{path}: only one class present")
    X = np.asarray(columns, dtype=float).T.copy()
    schema = DatasetSchema(tuple(attributes), label_col, spec.positive)
    return Dataset(name or path.stem, X, y, schema)


# --------------------------------------------------------------------------
# cross-validation

@dataclass
class FoldPlan:
    """Test-index sets per (repeat, fold); training sets are complements."""

    k: int
    repeats: int
    n: int
    test_sets: list[list[np.ndarray]]

    def test(self, repeat: int, fold: int) -> np.ndarray:
        return self.test_sets[repeat][fold]

    def train(self, repeat: int, fold: int) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.test_sets[repeat][fold]] = False
        return np.flatnonzero(mask)


def stratified_kfold(ds, k: int = 5, repeats: int = 20, rng=None) -> FoldPlan:
    """Shuffle each class and deal it round-robin into ``k`` folds.

    ``ds`` is a :class:`Dataset` or a label vector.  Dealing continues across
    classes so fold sizes also differ by at most one.
    """
    y = np.asarray(getattr(ds, "y", ds))
    if rng is None:
        rng = np.random.default_rng()
    classes = [np.flatnonzero(y == c) for c in (1, 0)]
    for c, members in zip((1, 0), classes):
        if len(members) < k:
            raise ValueError(f"class {c} has {len(members)} members, fewer than k={k}")
    plans = []
    for _ in range(repeats):
        folds = [[] for _ in range(k)]
        slot = 0
        for members in classes:
            for i in rng.permutation(members):
                folds[slot % k].append(int(i))
                slot += 1
        plans.append([np.asarray(sorted(f), dtype=np.int64) for f in folds])
    return FoldPlan(k, repeats, len(y), plans)
