"""Plots and summary tables for finished runs."""
from src.infrastructure.reporting.plots import IG_PLOT, REWARD_PLOT, plot_training_curves
from src.infrastructure.reporting.summary import (
    EVAL_METRICS,
    EpochSummary,
    IgComparison,
    aggregate_eval,
    compare_first_last,
    epoch_summaries,
    eval_table,
    mean_std,
    render_text,
    training_table,
)

__all__ = [
    "EVAL_METRICS",
    "EpochSummary",
    "IG_PLOT",
    "IgComparison",
    "REWARD_PLOT",
    "aggregate_eval",
    "compare_first_last",
    "epoch_summaries",
    "eval_table",
    "mean_std",
    "plot_training_curves",
    "render_text",
    "training_table",
]
