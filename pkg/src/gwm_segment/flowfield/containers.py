"""Dense flow, image and label containers.

Coordinates: x grows rightward, y grows downward. Flow ``F_u`` maps pixel
``u`` in frame t to ``u + F_u`` in frame t+1. Arrays are stored row-major
with the top row first, i.e. ``data[y, x]``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from gwm_segment.errors import DimensionMismatch, DimensionOverflow, NonFiniteValue

MAX_DIMENSION = 65535


def check_dimensions(width: int, height: int) -> None:
    """Raise DimensionOverflow unless 1 <= width, height <= 65535."""
    if not (0 < width <= MAX_DIMENSION and 0 < height <= MAX_DIMENSION):
        raise DimensionOverflow(f"invalid dimensions {width}x{height}")


@dataclass(frozen=True, eq=False)
class FlowField:
    """Per-pixel displacement (u_x, u_y) in px/frame, float32, shape (H, W, 2)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        if data.ndim != 3 or data.shape[2] != 2:
            raise DimensionMismatch(f"flow must have shape (H, W, 2), got {data.shape}")
        check_dimensions(data.shape[1], data.shape[0])
        if not np.all(np.isfinite(data)):
            raise NonFiniteValue("flow field contains NaN or Inf")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width)."""
        return self.data.shape[:2]

    @classmethod
    def zeros(cls, width: int, height: int) -> FlowField:
        return cls(np.zeros((height, width, 2), dtype=np.float32))

    def magnitude(self) -> np.ndarray:
        """Per-pixel Euclidean norm as float64, shape (H, W)."""
        return np.hypot(self.data[..., 0].astype(np.float64), self.data[..., 1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FlowField):
            return NotImplemented
        return self.data.shape == other.data.shape and self.data.tobytes() == other.data.tobytes()


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB image, shape (H, W, 3)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data)
        if data.ndim != 3 or data.shape[2] != 3:
            raise DimensionMismatch(f"image must have shape (H, W, 3), got {data.shape}")
        if data.dtype != np.uint8:
            raise DimensionMismatch(f"image must be uint8, got {data.dtype}")
        check_dimensions(data.shape[1], data.shape[0])
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    def digest(self) -> str:
        """SHA-256 of dimensions and pixel bytes; identifies a frame."""
        hash_obj = hashlib.sha256()
        hash_obj.update(f"{self.width}x{self.height}".encode())
        hash_obj.update(self.data.tobytes())
        return hash_obj.hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RgbImage):
            return NotImplemented
        return self.data.shape == other.data.shape and np.array_equal(self.data, other.data)


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Small-integer labels, shape (H, W): 0 = background, 1..N = instances."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data)
        if data.ndim != 2:
            raise DimensionMismatch(f"labels must have shape (H, W), got {data.shape}")
        if data.dtype == bool:
            data = data.astype(np.uint8)
        if not np.issubdtype(data.dtype, np.integer) or (data.size and data.min() < 0):
            raise DimensionMismatch("labels must be non-negative integers")
        check_dimensions(data.shape[1], data.shape[0])
        data = data.astype(np.int32)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def num_labels(self) -> int:
        """Largest label N."""
        return int(self.data.max()) if self.data.size else 0

    def is_dense(self) -> bool:
        """True when every label in [0, N] occurs."""
        present = np.unique(self.data)
        return present.size == self.num_labels + 1

    def foreground(self) -> np.ndarray:
        """Boolean mask of non-zero labels."""
        return self.data > 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return np.array_equal(self.data, other.data)


def require_same_lattice(*shapes: tuple[int, int]) -> None:
    """Raise DimensionMismatch unless all (H, W) shapes agree."""
    first = tuple(shapes[0])
    for shape in shapes[1:]:
        if tuple(shape) != first:
            raise DimensionMismatch(f"lattice {tuple(shape)} does not match {first}")
