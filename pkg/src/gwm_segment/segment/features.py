"""Hand-crafted per-pixel appearance features.

Base features are ``[r, g, b, x_norm, y_norm, 1]`` with colours in [0, 1]
and coordinates normalized to [-1, 1]. A pixel sits at x_norm = 0 only when
the width is odd (likewise y_norm and the height); for an even width the two
middle columns straddle 0 at +-1/(width - 1). Optionally ``D`` random Fourier
pairs ``cos(W phi5), sin(W phi5)`` of the first five base features are appended,
with ``W`` a (D, 5) matrix of Normal(0, fourier_scale^2) draws from
SplitMix64(seed).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from gwm_segment.errors import ConfigError
from gwm_segment.flowfield.containers import RgbImage
from gwm_segment.motion.models import CoordNormalization
from gwm_segment.prng import SplitMix64

BASE_DIM = 6


@dataclass(frozen=True)
class FeatureSpec:
    fourier_pairs: int = 0
    fourier_scale: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.fourier_pairs < 0:
            raise ConfigError(f"fourier_pairs must be >= 0, got {self.fourier_pairs}")
        if not self.fourier_scale > 0:
            raise ConfigError(f"fourier_scale must be > 0, got {self.fourier_scale}")

    @property
    def dim(self) -> int:
        return BASE_DIM + 2 * self.fourier_pairs

    def frequencies(self) -> np.ndarray:
        """Fourier frequency matrix, shape (D, 5)."""
        rng = SplitMix64(self.seed)
        return rng.normal(self.fourier_pairs * 5, self.fourier_scale).reshape(self.fourier_pairs, 5)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> FeatureSpec:
        return cls(
            fourier_pairs=int(payload.get("fourier_pairs", 0)),
            fourier_scale=float(payload.get("fourier_scale", 3.0)),
            seed=int(payload.get("seed", 0)),
        )


def featurize(image: RgbImage, spec: FeatureSpec | None = None) -> np.ndarray:
    """Per-pixel feature vectors, shape (H, W, spec.dim)."""
    spec = spec or FeatureSpec()
    rgb = image.data.astype(np.float64) / 255.0
    coords = CoordNormalization.for_shape(image.shape).grid()
    ones = np.ones(image.shape + (1,))
    base = np.concatenate([rgb, coords, ones], axis=-1)
    if not spec.fourier_pairs:
        return base
    projected = base[..., :5] @ spec.frequencies().T
    return np.concatenate([base, np.cos(projected), np.sin(projected)], axis=-1)
