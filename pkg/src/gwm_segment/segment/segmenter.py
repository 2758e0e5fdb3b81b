"""Mask parameterizations: per-pixel logits and a shared linear model over features."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np

from gwm_segment.errors import ConfigError, IoFailure, ModeMismatch, ValidationError
from gwm_segment.flowfield.containers import RgbImage
from gwm_segment.motion.energy import SoftMasks
from gwm_segment.segment.features import FeatureSpec, featurize

SEGMENTER_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class PerPixelSegmenter:
    """One free (H, W, K) logit tensor per training frame.

    Frames are identified by RgbImage.digest(); the segmenter can only
    predict on the frames it was optimized on.
    """

    logits: tuple[np.ndarray, ...]
    frame_ids: tuple[str, ...]

    @property
    def K(self) -> int:
        return self.logits[0].shape[-1]

    def masks(self, frame_index: int) -> SoftMasks:
        return SoftMasks.from_logits(self.logits[frame_index])

    def predict(self, image: RgbImage) -> SoftMasks:
        try:
            index = self.frame_ids.index(image.digest())
        except ValueError:
            raise ModeMismatch(
                "a per-pixel segmenter only predicts on its own training frames"
            ) from None
        return self.masks(index)


@dataclass(frozen=True, eq=False)
class LinearFeatureSegmenter:
    """Logits ``W phi_u`` shared across frames; ``weights`` has shape (K, feature dim)."""

    feature_spec: FeatureSpec
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[1] != self.feature_spec.dim:
            raise ConfigError(
                f"weights must be (K, {self.feature_spec.dim}), got {weights.shape}"
            )
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", weights)

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    def logits(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights.T

    def predict(self, image: RgbImage) -> SoftMasks:
        return SoftMasks.from_logits(self.logits(featurize(image, self.feature_spec)))

    def to_dict(self, seed: int | None = None, config: dict[str, Any] | None = None) -> dict[str, Any]:
        """JSON document; weights row-major as shortest round-trip decimal strings."""
        return {
            "schema_version": SEGMENTER_SCHEMA_VERSION,
            "kind": "linear",
            "feature_spec": self.feature_spec.to_dict(),
            "K": self.K,
            "feature_dim": self.feature_spec.dim,
            "weights": [repr(float(v)) for v in self.weights.reshape(-1)],
            "seed": seed,
            "config": config or {},
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> LinearFeatureSegmenter:
        if payload.get("schema_version") != SEGMENTER_SCHEMA_VERSION:
            raise ValidationError("Unsupported segmenter schema_version (expected 1).")
        if payload.get("kind") != "linear":
            raise ValidationError("Only linear segmenters are serialized.")
        spec = FeatureSpec.from_dict(payload.get("feature_spec", {}))
        values = np.array([float(v) for v in payload["weights"]], dtype=np.float64)
        K = int(payload["K"])
        if values.size != K * spec.dim:
            raise ValidationError(f"expected {K * spec.dim} weights, got {values.size}")
        return cls(spec, values.reshape(K, spec.dim))


Segmenter = Union[PerPixelSegmenter, LinearFeatureSegmenter]


def predict(segmenter: Segmenter, image: RgbImage) -> SoftMasks:
    """Soft masks for ``image``.

    Raises:
        ModeMismatch: per-pixel segmenter given a frame it was not trained on.
    """
    return segmenter.predict(image)


def save_segmenter(
    segmenter: LinearFeatureSegmenter,
    path: Path | str,
    seed: int | None = None,
    config: dict[str, Any] | None = None,
) -> None:
    payload = segmenter.to_dict(seed=seed, config=config)
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, ensure_ascii=False)
            f.write("\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def load_segmenter(path: Path | str) -> LinearFeatureSegmenter:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    return LinearFeatureSegmenter.from_dict(payload)
