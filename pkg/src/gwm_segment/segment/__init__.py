"""Mask parameterizations and the internal-learning training loop."""

from gwm_segment.segment.features import FeatureSpec, featurize
from gwm_segment.segment.segmenter import (
    LinearFeatureSegmenter,
    PerPixelSegmenter,
    load_segmenter,
    predict,
    save_segmenter,
)
from gwm_segment.segment.training import InitKind, Mode, TrainConfig, TrainResult, train_internal

__all__ = [
    "FeatureSpec",
    "InitKind",
    "LinearFeatureSegmenter",
    "Mode",
    "PerPixelSegmenter",
    "TrainConfig",
    "TrainResult",
    "featurize",
    "load_segmenter",
    "predict",
    "save_segmenter",
    "train_internal",
]
