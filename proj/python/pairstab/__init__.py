"""Pairwise SGD / SGDA stability and PAC-Bayes tools (C++ core)."""

from pathlib import Path

from ._core import (
    Dataset,
    PairstabError,
    block_risk_identity_check,
    chernoff_occupancy_bound,
    kl_step,
    load_dataset,
    make_synthetic,
    pacbayes_bound,
    recipe,
    renyi_moment6,
    run_command,
    sample_trajectory,
    stability_coefficients,
    u_statistic,
)

__all__ = [
    "Dataset",
    "PairstabError",
    "block_risk_identity_check",
    "chernoff_occupancy_bound",
    "kl_step",
    "load_dataset",
    "make_synthetic",
    "pacbayes_bound",
    "recipe",
    "renyi_moment6",
    "run",
    "run_command",
    "sample_trajectory",
    "stability_coefficients",
    "u_statistic",
]


def run(command, config_path, overrides=None, run=None, report=None):
    """Runs a subcommand on a config file; `overrides` maps keys to values
    (e.g. {"out": "/tmp/x", "seed": 3}) exactly like the CLI flags."""
    text = Path(config_path).read_text()
    kv = {k: str(v) for k, v in (overrides or {}).items()}
    return run_command(command, text, kv, run=run, report=report)
