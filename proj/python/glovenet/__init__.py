"""Multi-IMU hand gesture classification with a small transformer and a decision-tree baseline."""

from ._glovenet import (
    Classifier,
    ContractError,
    Dataset,
    Error,
    FormatError,
    IndexError,
    NumericError,
    ShapeError,
    UsageError,
    ValidationError,
    ablation_sweep,
    evaluate,
    extract_features,
    generate_synthetic,
    holdout_split,
    load_classifier,
    load_dataset,
    loto_folds,
    make_classifier,
    save_dataset,
    standardize,
    window_count,
)

__all__ = [
    "Classifier",
    "ContractError",
    "Dataset",
    "Error",
    "FormatError",
    "IndexError",
    "NumericError",
    "ShapeError",
    "UsageError",
    "ValidationError",
    "ablation_sweep",
    "evaluate",
    "extract_features",
    "generate_synthetic",
    "holdout_split",
    "load_classifier",
    "load_dataset",
    "loto_folds",
    "make_classifier",
    "save_dataset",
    "standardize",
    "window_count",
]
