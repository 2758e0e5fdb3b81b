"""Binary file I/O: Middlebury .flo for flow, PGM/PPM for masks and images."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from gwm_segment.errors import (
    BadMagic,
    DimensionOverflow,
    FlowFormatError,
    IoFailure,
    NonFiniteValue,
    TruncatedFile,
)
from gwm_segment.flowfield.containers import (
    MAX_DIMENSION,
    FlowField,
    LabelMap,
    RgbImage,
)

logger = logging.getLogger(__name__)

FLO_MAGIC = np.float32(202021.25)
FLO_HEADER_BYTES = 12


def read_flo(path: Path | str) -> FlowField:
    """Read a Middlebury .flo file.

    Layout (little-endian): float32 202021.25, int32 width, int32 height,
    then height*width interleaved float32 (u_x, u_y), top row first.

    Raises:
        BadMagic, TruncatedFile, FlowFormatError (trailing bytes), DimensionOverflow,
        NonFiniteValue, IoFailure
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e

    if len(raw) < FLO_HEADER_BYTES:
        raise TruncatedFile(f"{path}: {len(raw)} bytes is shorter than the header")
    magic = np.frombuffer(raw, dtype="<f4", count=1, offset=0)[0]
    if magic != FLO_MAGIC:
        raise BadMagic(f"{path}: magic {magic!r} != 202021.25")
    width, height = (int(v) for v in np.frombuffer(raw, dtype="<i4", count=2, offset=4))
    if not (0 < width <= MAX_DIMENSION and 0 < height <= MAX_DIMENSION):
        raise DimensionOverflow(f"{path}: invalid dimensions {width}x{height}")

    count = width * height * 2
    if len(raw) < FLO_HEADER_BYTES + 4 * count:
        raise TruncatedFile(f"{path}: expected {count} flow values")
    extra = len(raw) - FLO_HEADER_BYTES - 4 * count
    if extra > 0:
        raise FlowFormatError(f"{path}: {extra} trailing byte(s) after the flow values")
    values = np.frombuffer(raw, dtype="<f4", count=count, offset=FLO_HEADER_BYTES)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue(f"{path}: flow contains NaN or Inf")
    return FlowField(values.astype(np.float32).reshape(height, width, 2))


def encode_flo(field: FlowField) -> bytes:
    """Serialize a flow field to .flo bytes."""
    data = np.asarray(field.data)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue("flow field contains NaN or Inf")
    header = np.array([FLO_MAGIC], dtype="<f4").tobytes()
    header += np.array([field.width, field.height], dtype="<i4").tobytes()
    return header + data.astype("<f4").tobytes()


def write_flo(field: FlowField, path: Path | str) -> None:
    """Write ``field`` as .flo; bit-exact with read_flo.

    Raises:
        NonFiniteValue: before anything is written.
        IoFailure: on OS errors.
    """
    payload = encode_flo(field)
    try:
        Path(path).write_bytes(payload)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def label_gray_levels(num_labels: int) -> np.ndarray:
    """Gray level for each label 0..N: round(l * 255 / N) (0/255 for binary)."""
    n = max(int(num_labels), 1)
    return np.round(np.arange(n + 1) * 255.0 / n).astype(np.uint8)


def write_pgm(labels: LabelMap, path: Path | str, num_labels: int | None = None) -> None:
    """Write labels as binary PGM (P5, maxval 255) with evenly spaced gray levels.

    Args:
        labels: Map to write.
        path: Destination.
        num_labels: N used for the gray scale; defaults to the map's maximum,
            so a binary mask is written as 0/255.
    """
    n = labels.num_labels if num_labels is None else num_labels
    if labels.num_labels > max(n, 1):
        raise FlowFormatError(f"label {labels.num_labels} exceeds scale N={n}")
    gray = label_gray_levels(n)[labels.data]
    _save_pnm(Image.fromarray(gray), path)


def read_pgm(path: Path | str, num_labels: int = 1) -> LabelMap:
    """Read a PGM written by write_pgm back into labels 0..num_labels."""
    gray = np.asarray(_open_pnm(path, "L"))
    levels = label_gray_levels(num_labels).astype(np.int32)
    # nearest level, so 8-bit rounding never shifts a label
    labels = np.abs(gray.astype(np.int32)[..., None] - levels).argmin(axis=-1)
    return LabelMap(labels)


def write_ppm(image: RgbImage, path: Path | str) -> None:
    """Write an RGB image as binary PPM (P6)."""
    _save_pnm(Image.fromarray(np.asarray(image.data)), path)


def read_ppm(path: Path | str) -> RgbImage:
    """Read a binary PPM (P6)."""
    return RgbImage(np.array(_open_pnm(path, "RGB"), dtype=np.uint8))


def _save_pnm(image: Image.Image, path: Path | str) -> None:
    try:
        image.save(Path(path), format="PPM")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def _open_pnm(path: Path | str, mode: str) -> Image.Image:
    try:
        with Image.open(Path(path)) as img:
            if img.mode != mode:
                logger.debug("converting %s from %s to %s", path, img.mode, mode)
            return img.convert(mode)
    except FileNotFoundError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
    except UnidentifiedImageError as e:
        raise FlowFormatError(f"{path}: not a PNM image") from e
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e
