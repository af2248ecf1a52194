"""Film scoring harness: rubric judging, derived metrics, and human-correlation statistics."""

from .judge import judge_film, load_rubrics, rubric_filename
from .scorecard import (
    CRITERIA,
    CRITERION_NAMES,
    ScoreCard,
    derive_metrics,
    round_display,
)
from .stats import UndefinedCorrelation, correlate, kendall_tau_b, midranks, pearson_r, spearman_rho

__all__ = [
    "CRITERIA",
    "CRITERION_NAMES",
    "ScoreCard",
    "UndefinedCorrelation",
    "correlate",
    "derive_metrics",
    "judge_film",
    "kendall_tau_b",
    "load_rubrics",
    "midranks",
    "pearson_r",
    "round_display",
    "rubric_filename",
    "spearman_rho",
]
