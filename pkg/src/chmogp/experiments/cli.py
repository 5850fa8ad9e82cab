"""Command-line front end: ``chmogp run|summarize|compare|curves``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from chmogp.experiments import stats
from chmogp.experiments.config import load_config
from chmogp.experiments.runner import read_rows, run_experiment


def _results(path: str) -> list[dict]:
    p = Path(path)
    if p.is_dir():
        p = p / "results.csv"
    rows = read_rows(p)
    if not rows:
        raise SystemExit(f"no results in {p}")
    return rows


def _print_table(table, out=None) -> None:
    out = out or sys.stdout
    widths = [max(len(str(row[i])) for row in table) for i in range(len(table[0]))]
    for row in table:
        out.write("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip() + "\n")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.workers:
        cfg.workers = args.workers

    def progress(job, rows, wall):
        logging.info("%s %s r%d f%d %s %.1fs", job.dataset, job.selector, job.repeat,
                     job.fold, rows[0]["status"], wall)

    report = run_experiment(cfg, progress)
    print(f"{report.ran} jobs run, {report.skipped} already done, {report.failed} failed; "
          f"{len(report.rows)} rows in {report.out / 'results.csv'}")
    return 1 if args.strict and report.failed else 0


def cmd_summarize(args) -> int:
    rows = _results(args.input)
    table = stats.summary_table(rows, args.ratio)
    _print_table(table)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(table)
    return 0


def cmd_compare(args) -> int:
    names = [s.strip() for s in args.selectors.split(",")]
    if len(names) != 2:
        raise SystemExit("--selectors takes exactly two names, e.g. CH-MOGP,NSGA-II")
    a, b = names
    out = stats.compare(_results(args.input), a, b, args.alpha)
    table = [["ratio", f"{a} vs {b} (w-d-l)"]]
    table += [[str(r["ratio"]), f"{r['wins']}-{r['draws']}-{r['losses']}"] for r in out]
    _print_table(table)
    return 0


def cmd_curves(args) -> int:
    src = Path(args.input)
    out = Path(args.out) if args.out else (src if src.is_dir() else src.parent) / "curves.csv"
    rows = stats.curves(_results(args.input))
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"{len(rows)} curve rows written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chmogp", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run (or resume) an experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=0, help="override the config's worker count")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any job failed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("summarize", help="mean ± std of test AUCH x100")
    p.add_argument("--in", dest="input", required=True, help="result directory or results.csv")
    p.add_argument("--ratio", default=None, help="checkpoint ratio (default: the last)")
    p.add_argument("--out", default=None, help="also write the table as CSV")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("compare", help="rank-sum win-draw-loss per checkpoint ratio")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--selectors", required=True, help="two labels, e.g. CH-MOGP,MOEA/D")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("curves", help="write mean AUCH per checkpoint ratio")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_curves)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
