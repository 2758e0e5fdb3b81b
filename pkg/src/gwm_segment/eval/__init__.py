"""Evaluation metrics matching the foreground/background protocol."""

from gwm_segment.eval.metrics import (
    JaccardReport,
    assignment_mask,
    evaluate_run,
    jaccard,
    oracle_component_assignment,
    oracle_predictions,
)

__all__ = [
    "JaccardReport",
    "assignment_mask",
    "evaluate_run",
    "jaccard",
    "oracle_component_assignment",
    "oracle_predictions",
]
