"""Parametric flow models ``F_u ~ A lift(u) + b``.

Pixel coordinates are first mapped to [-1, 1]^2 by CoordNormalization so
that quadratic moment matrices stay well conditioned; this reparameterizes
the same function family and leaves fitted energies unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from gwm_segment.errors import ConfigError, DimensionMismatch
from gwm_segment.flowfield.containers import FlowField


class ModelFamily(str, Enum):
    """Motion model family; ``dim`` is the lifted basis size without the constant."""

    CONSTANT = "constant"
    AFFINE = "affine"
    QUADRATIC12 = "quadratic12"

    @property
    def dim(self) -> int:
        return _FAMILY_DIMS[self]

    @property
    def num_params(self) -> int:
        """Parameters of the full model (two output channels)."""
        return 2 * (self.dim + 1)

    @classmethod
    def parse(cls, value: ModelFamily | str) -> ModelFamily:
        if isinstance(value, ModelFamily):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(f.value for f in cls)
            raise ConfigError(f"unknown model family {value!r} (expected one of {choices})") from None


_FAMILY_DIMS = {
    ModelFamily.CONSTANT: 0,
    ModelFamily.AFFINE: 2,
    ModelFamily.QUADRATIC12: 5,
}


@dataclass(frozen=True)
class CoordNormalization:
    """Affine map from pixel centres (x, y) in [0, W) x [0, H) to [-1, 1]^2.

    Pixel 0 maps to -1 and pixel W-1 to +1; a one-pixel axis maps to 0.
    """

    width: int
    height: int

    @classmethod
    def for_shape(cls, shape: tuple[int, int]) -> CoordNormalization:
        """Normalization for an (H, W) lattice."""
        return cls(width=int(shape[1]), height=int(shape[0]))

    @property
    def _scale(self) -> tuple[float, float]:
        sx = 2.0 / (self.width - 1) if self.width > 1 else 1.0
        sy = 2.0 / (self.height - 1) if self.height > 1 else 1.0
        return sx, sy

    @property
    def _offset(self) -> tuple[float, float]:
        return (-1.0 if self.width > 1 else 0.0, -1.0 if self.height > 1 else 0.0)

    def normalize(self, points: np.ndarray) -> np.ndarray:
        """Pixel coordinates (..., 2) -> normalized (..., 2)."""
        points = np.asarray(points, dtype=np.float64)
        return points * np.array(self._scale) + np.array(self._offset)

    def denormalize(self, points: np.ndarray) -> np.ndarray:
        """Inverse of normalize."""
        points = np.asarray(points, dtype=np.float64)
        return (points - np.array(self._offset)) / np.array(self._scale)

    def grid(self) -> np.ndarray:
        """Normalized coordinates of every pixel, shape (H, W, 2)."""
        ys, xs = np.mgrid[0 : self.height, 0 : self.width]
        return self.normalize(np.stack([xs, ys], axis=-1))


def lift(u: np.ndarray, family: ModelFamily) -> np.ndarray:
    """Model basis at normalized points ``u`` (..., 2), without the constant 1.

    Quadratic12 -> [x, x^2, y, y^2, xy]; Affine -> [x, y]; Constant -> [].
    """
    u = np.asarray(u, dtype=np.float64)
    x, y = u[..., 0], u[..., 1]
    family = ModelFamily.parse(family)
    if family is ModelFamily.QUADRATIC12:
        return np.stack([x, x * x, y, y * y, x * y], axis=-1)
    if family is ModelFamily.AFFINE:
        return np.stack([x, y], axis=-1)
    return np.zeros(u.shape[:-1] + (0,))


def design_matrix(norm: CoordNormalization, family: ModelFamily) -> np.ndarray:
    """Homogeneous design [lift(u), 1] for every pixel in row-major order, (N, d+1)."""
    lifted = lift(norm.grid(), family).reshape(norm.height * norm.width, ModelFamily.parse(family).dim)
    return np.hstack([lifted, np.ones((lifted.shape[0], 1))])


@dataclass(frozen=True, eq=False)
class MotionModelParams:
    """Fitted (A, b) of one region plus its weighted residual energy.

    Attributes:
        family: Model family.
        A: (2, d) flow px per normalized-coordinate unit (empty for Constant).
        b: (2,) offset in px.
        energy: Weighted sum of squared residuals (px^2), original weight scale.
        weight_total: Sum of the fitting weights.
        degenerate: True when the region had too little mass to be fitted.
    """

    family: ModelFamily
    A: np.ndarray
    b: np.ndarray
    energy: float = 0.0
    weight_total: float = 0.0
    degenerate: bool = False

    def __post_init__(self):
        family = ModelFamily.parse(self.family)
        A = np.asarray(self.A, dtype=np.float64).reshape(2, family.dim)
        b = np.asarray(self.b, dtype=np.float64).reshape(2)
        if self.energy < 0:
            raise ValueError(f"energy must be non-negative, got {self.energy}")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def zero(cls, family: ModelFamily | str) -> MotionModelParams:
        family = ModelFamily.parse(family)
        return cls(family, np.zeros((2, family.dim)), np.zeros(2))

    @classmethod
    def from_matrix(cls, family: ModelFamily | str, M: np.ndarray, **kwargs: Any) -> MotionModelParams:
        """Build from M = [A b] of shape (2, d+1)."""
        family = ModelFamily.parse(family)
        M = np.asarray(M, dtype=np.float64)
        if M.shape != (2, family.dim + 1):
            raise DimensionMismatch(f"M must be (2, {family.dim + 1}), got {M.shape}")
        return cls(family, M[:, : family.dim], M[:, family.dim], **kwargs)

    def matrix(self) -> np.ndarray:
        """M = [A b], shape (2, d+1)."""
        return np.hstack([self.A, self.b[:, None]])

    def predict(self, points: np.ndarray) -> np.ndarray:
        """Flow at normalized points (..., 2)."""
        return lift(points, self.family) @ self.A.T + self.b

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> MotionModelParams:
        family = ModelFamily.parse(payload["family"])
        A = np.asarray(payload.get("A") or np.zeros((2, 0)), dtype=np.float64)
        return cls(family, A.reshape(2, family.dim), payload["b"])


def residual_map(
    flow: FlowField, params: MotionModelParams, norm: CoordNormalization | None = None
) -> np.ndarray:
    """Per-pixel squared residual ``||F_u - A lift(u) - b||^2``, shape (H, W)."""
    norm = norm or CoordNormalization.for_shape(flow.shape)
    predicted = params.predict(norm.grid())
    diff = flow.data.astype(np.float64) - predicted
    return np.einsum("hwc,hwc->hw", diff, diff)


def synthesize_flow(
    params: MotionModelParams,
    width: int,
    height: int,
    norm: CoordNormalization | None = None,
) -> FlowField:
    """Evaluate ``A lift(u) + b`` at every pixel."""
    norm = norm or CoordNormalization(width, height)
    if (norm.width, norm.height) != (width, height):
        raise DimensionMismatch("normalization does not match the requested size")
    return FlowField(params.predict(norm.grid()).astype(np.float32))
