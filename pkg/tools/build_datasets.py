"""Regenerate the bundled datasets under data/.

monks-3 is produced by enumerating all 432 attribute combinations and
labelling them with the MONK-3 target concept, which reproduces the
noise-free UCI ``monks-3.test`` file.

bcw is converted from the MASS ``biopsy`` table (the 699-row Wisconsin
breast cancer data), shipped for instance inside the ``pydataset`` sdist as
``resources/rdata/csv/MASS/biopsy.csv``::

    python tools/build_datasets.py --biopsy path/to/biopsy.csv
"""
import argparse
import csv
import itertools
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"


def write_monks3(out: Path) -> None:
    lines = []
    domains = [(1, 2, 3), (1, 2, 3), (1, 2), (1, 2, 3), (1, 2, 3, 4), (1, 2)]
    for n, (a1, a2, a3, a4, a5, a6) in enumerate(itertools.product(*domains), 1):
        label = int((a5 == 3 and a4 == 1) or (a5 != 4 and a2 != 3))
        lines.append(f" {label} {a1} {a2} {a3} {a4} {a5} {a6} data_{n}")
    out.write_text("\n".join(lines) + "\n")


def write_bcw(biopsy: Path, out: Path) -> None:
    rows = []
    with open(biopsy, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for rec in reader:
            _, ident, *feats, cls = rec
            feats = ["?" if v == "NA" else v for v in feats]
            rows.append(",".join([ident, *feats, "2" if cls == "benign" else "4"]))
    out.write_text("\n".join(rows) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--biopsy", type=Path, help="MASS biopsy.csv to convert into bcw.data")
    args = ap.parse_args()
    write_monks3(DATA / "monks-3.data")
    if args.biopsy:
        write_bcw(args.biopsy, DATA / "bcw.data")


if __name__ == "__main__":
    main()
