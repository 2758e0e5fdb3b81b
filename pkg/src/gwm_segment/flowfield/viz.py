"""Flow and mask visualization.

Flow colours use the Middlebury colour wheel (Baker et al.): 55 hues in six
segments RY=15, YG=6, GC=4, CB=11, BM=13, MR=6. Hue encodes direction,
saturation encodes magnitude relative to ``max_magnitude`` (clamped at 1);
zero flow is white. Reference colours at full magnitude:

    (+m, 0)  -> (255, 0, 43)
    (-m, 0)  -> (0, 209, 255)
"""

from __future__ import annotations

import numpy as np

from gwm_segment.flowfield.containers import FlowField, LabelMap, RgbImage, require_same_lattice

AUTO = "auto"

# Fixed palette for component / label maps; label l uses PALETTE[l % 16].
PALETTE = np.array(
    [
        (0, 0, 0),
        (230, 25, 75),
        (60, 180, 75),
        (255, 225, 25),
        (0, 130, 200),
        (245, 130, 48),
        (145, 30, 180),
        (70, 240, 240),
        (240, 50, 230),
        (210, 245, 60),
        (250, 190, 212),
        (0, 128, 128),
        (220, 190, 255),
        (170, 110, 40),
        (128, 0, 0),
        (255, 255, 255),
    ],
    dtype=np.uint8,
)


def make_color_wheel() -> np.ndarray:
    """Colour wheel as float array of shape (55, 3), values in [0, 255]."""
    RY, YG, GC, CB, BM, MR = 15, 6, 4, 11, 13, 6
    wheel = np.zeros((RY + YG + GC + CB + BM + MR, 3))
    col = 0
    wheel[0:RY, 0] = 255
    wheel[0:RY, 1] = np.floor(255 * np.arange(0, RY) / RY)
    col += RY
    wheel[col : col + YG, 0] = 255 - np.floor(255 * np.arange(0, YG) / YG)
    wheel[col : col + YG, 1] = 255
    col += YG
    wheel[col : col + GC, 1] = 255
    wheel[col : col + GC, 2] = np.floor(255 * np.arange(0, GC) / GC)
    col += GC
    wheel[col : col + CB, 1] = 255 - np.floor(255 * np.arange(CB) / CB)
    wheel[col : col + CB, 2] = 255
    col += CB
    wheel[col : col + BM, 2] = 255
    wheel[col : col + BM, 0] = np.floor(255 * np.arange(0, BM) / BM)
    col += BM
    wheel[col : col + MR, 2] = 255 - np.floor(255 * np.arange(MR) / MR)
    wheel[col : col + MR, 0] = 255
    return wheel


COLOR_WHEEL = make_color_wheel()


def resolve_max_magnitude(field: FlowField, max_magnitude: float | str = AUTO) -> float:
    """Normalization magnitude: explicit value, or the 99th percentile in auto mode.

    The percentile runs over moving pixels only, so zero padding does not
    change the colours. An all-zero field uses 1.
    """
    if max_magnitude != AUTO:
        value = float(max_magnitude)
        if not value > 0:
            raise ValueError(f"max_magnitude must be positive, got {max_magnitude}")
        return value
    magnitude = field.magnitude()
    moving = magnitude[magnitude > 0]
    if moving.size == 0:
        return 1.0
    return float(np.percentile(moving, 99))


def flow_to_color(field: FlowField, max_magnitude: float | str = AUTO) -> RgbImage:
    """Colour-code a flow field.

    Args:
        field: Flow to visualize.
        max_magnitude: Magnitude mapped to full saturation, or "auto".

    Returns:
        RGB image of the same size.
    """
    scale = resolve_max_magnitude(field, max_magnitude)
    u = field.data[..., 0].astype(np.float64) / scale
    v = field.data[..., 1].astype(np.float64) / scale

    ncols = COLOR_WHEEL.shape[0]
    rad = np.minimum(np.sqrt(u**2 + v**2), 1.0)
    # 0.0 - x maps -0.0 to +0.0, so the wheel seam does not depend on zero signs
    a = np.arctan2(0.0 - v, 0.0 - u) / np.pi
    fk = (a + 1) / 2 * (ncols - 1)
    k0 = np.floor(fk).astype(np.int32)
    k1 = (k0 + 1) % ncols
    f = fk - k0

    out = np.empty(field.shape + (3,), dtype=np.uint8)
    for ch in range(3):
        col = (1 - f) * COLOR_WHEEL[k0, ch] + f * COLOR_WHEEL[k1, ch]
        out[..., ch] = np.floor(255 - rad * (255 - col))
    return RgbImage(out)


def labels_to_color(labels: LabelMap) -> RgbImage:
    """Colour each label with the fixed palette."""
    return RgbImage(PALETTE[labels.data % len(PALETTE)])


def overlay(image: RgbImage, labels: LabelMap, alpha: float = 0.5) -> RgbImage:
    """Blend the palette colours of ``labels`` over ``image``; label 0 stays untouched."""
    require_same_lattice(image.shape, labels.shape)
    base = image.data.astype(np.float64)
    colors = PALETTE[labels.data % len(PALETTE)].astype(np.float64)
    blended = np.where(
        (labels.data > 0)[..., None], (1 - alpha) * base + alpha * colors, base
    )
    return RgbImage(np.round(blended).astype(np.uint8))
