"""Credit-card fraud detection with a heterogeneous graph auto-encoder."""

from ._core import (
    FraudGraphError,
    average_precision,
    best_threshold,
    classify,
    confusion,
    evaluate,
    generate,
    roc_auc,
    score,
    train,
)

__all__ = [
    "FraudGraphError",
    "average_precision",
    "best_threshold",
    "classify",
    "confusion",
    "evaluate",
    "generate",
    "roc_auc",
    "score",
    "train",
]
