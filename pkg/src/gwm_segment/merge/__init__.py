"""Spectral merging of over-segmented components into foreground and background."""

from gwm_segment.merge.merging import (
    AffinityMatrix,
    MergeResult,
    SegmentFeatures,
    affinity,
    merge_masks,
    normalized_cut_value,
    pool_features,
    select_foreground,
    spectral_bipartition,
)

__all__ = [
    "AffinityMatrix",
    "MergeResult",
    "SegmentFeatures",
    "affinity",
    "merge_masks",
    "normalized_cut_value",
    "pool_features",
    "select_foreground",
    "spectral_bipartition",
]
