"""Experiment harness: configs, job orchestration, summaries and tests."""
from chmogp.experiments.config import BUDGET_PRESETS, DatasetEntry, RunConfig, load_config
from chmogp.experiments.runner import derive_seed, read_rows, run_experiment
from chmogp.experiments.stats import compare, curves, summarize, wilcoxon_rank_sum

__all__ = [
    "BUDGET_PRESETS", "DatasetEntry", "RunConfig", "load_config",
    "derive_seed", "read_rows", "run_experiment",
    "compare", "curves", "summarize", "wilcoxon_rank_sum",
]
