"""Merge K > 2 motion components into a binary foreground by appearance.

Each soft component is summarized by its mass-weighted mean feature vector.
Cosine similarities between those vectors (floored at epsilon) form a small
affinity graph that is cut in two along the Fiedler vector of the symmetric
normalized Laplacian, keeping the split with the lowest normalized cut.
The side touching the image border least is taken as foreground.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from gwm_segment.errors import AllDegenerate, DimensionMismatch, EigenFailure
from gwm_segment.flowfield.containers import LabelMap
from gwm_segment.motion.energy import SoftMasks, resolve_weight_floor

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-12

METHOD_IDENTITY = "identity"
METHOD_SPECTRAL = "spectral"
METHOD_FALLBACK = "fallback"


@dataclass(frozen=True, eq=False)
class SegmentFeatures:
    """Pooled appearance of each component.

    Attributes:
        means: (K, F) mass-weighted mean features; NaN rows for degenerate segments.
        mass: (K,) total probability of each component.
        degenerate: (K,) True where mass is below the weight floor.
    """

    means: np.ndarray
    mass: np.ndarray
    degenerate: np.ndarray

    @property
    def K(self) -> int:
        return self.means.shape[0]


@dataclass(frozen=True, eq=False)
class AffinityMatrix:
    values: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    @property
    def K(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class MergeResult:
    foreground: LabelMap
    coloring: tuple[bool, ...]
    method: str

    def to_dict(self) -> dict:
        return {"method": self.method, "coloring": [int(c) for c in self.coloring]}


def pool_features(
    features: np.ndarray, masks: SoftMasks, weight_floor: float | None = None
) -> SegmentFeatures:
    """Mass-weighted mean feature of every component.

    Args:
        features: Per-pixel features, shape (H, W, F).
        masks: Soft masks on the same lattice.
        weight_floor: Mass below which a segment is degenerate
            (default ``1e-8 * |Omega|``).
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape[:2] != tuple(masks.shape):
        raise DimensionMismatch(f"features {features.shape[:2]} vs masks {masks.shape}")
    probs = masks.probs.reshape(-1, masks.K)
    flat = features.reshape(probs.shape[0], -1)
    mass = probs.sum(axis=0)
    floor = resolve_weight_floor(probs.shape[0], weight_floor)
    degenerate = mass < floor
    sums = probs.T @ flat
    with np.errstate(divide="ignore", invalid="ignore"):
        means = sums / mass[:, None]
    means[degenerate] = np.nan
    return SegmentFeatures(means=means, mass=mass, degenerate=degenerate)


def affinity(sf: SegmentFeatures, epsilon: float = DEFAULT_EPSILON) -> AffinityMatrix:
    """Cosine affinity ``max(epsilon, <v_i/|v_i|, v_j/|v_j|>)``.

    Degenerate segments get epsilon to every other segment and 1 on the
    diagonal.

    Raises:
        AllDegenerate: fewer than two segments carry enough mass.
    """
    valid = ~sf.degenerate
    if int(valid.sum()) < 2:
        raise AllDegenerate(f"only {int(valid.sum())} of {sf.K} segments are non-degenerate")
    unit = np.zeros_like(sf.means)
    norms = np.linalg.norm(sf.means[valid], axis=1, keepdims=True)
    unit[valid] = sf.means[valid] / np.maximum(norms, np.finfo(np.float64).tiny)
    values = np.maximum(epsilon, unit @ unit.T)
    values[~valid, :] = epsilon
    values[:, ~valid] = epsilon
    values = np.minimum(values, 1.0)
    values = 0.5 * (values + values.T)
    np.fill_diagonal(values, 1.0)
    return AffinityMatrix(values=values, epsilon=epsilon)


def _as_array(pi: AffinityMatrix | np.ndarray) -> np.ndarray:
    values = pi.values if isinstance(pi, AffinityMatrix) else np.asarray(pi, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 2:
        raise DimensionMismatch(f"affinity must be a KxK matrix with K >= 2, got {values.shape}")
    return values


def fiedler_vector(pi: AffinityMatrix | np.ndarray) -> np.ndarray:
    """``D^-1/2 v`` for the eigenvector ``v`` of the second-smallest eigenvalue of
    ``L = I - D^-1/2 Pi D^-1/2``, signed so its largest-magnitude entry is positive.

    Raises:
        EigenFailure: numpy could not diagonalize the Laplacian.
    """
    values = _as_array(pi)
    inv_sqrt = 1.0 / np.sqrt(values.sum(axis=1))
    laplacian = np.eye(values.shape[0]) - inv_sqrt[:, None] * values * inv_sqrt[None, :]
    laplacian = 0.5 * (laplacian + laplacian.T)
    try:
        _, vectors = np.linalg.eigh(laplacian)
    except np.linalg.LinAlgError as e:
        raise EigenFailure(str(e)) from e
    y = inv_sqrt * vectors[:, 1]
    if y[np.argmax(np.abs(y))] < 0:
        y = -y
    return y


def _refine(values: np.ndarray, side: np.ndarray, value: float) -> tuple[np.ndarray, float]:
    """Move single segments across the cut while that lowers the normalized cut."""
    while True:
        best_node, best_value = -1, value
        for i in range(len(side)):
            side[i] = not side[i]
            if side.any() and not side.all():
                moved = normalized_cut_value(values, side)
                if moved < best_value * (1.0 - 1e-12):
                    best_node, best_value = i, moved
            side[i] = not side[i]
        if best_node < 0:
            return side, value
        side[best_node] = not side[best_node]
        value = best_value


def spectral_bipartition(pi: AffinityMatrix | np.ndarray) -> tuple[bool, ...]:
    """Two-way colouring of the K segments.

    Segments are ordered by the rescaled Fiedler vector and every split
    point along that order is tried; the split with the lowest normalized
    cut wins (ties go to the first one). Single segments are then moved
    across the cut while that lowers it further. The sweep puts the larger
    Fiedler entries on the True side.
    """
    values = _as_array(pi)
    y = fiedler_vector(values)
    order = np.argsort(-y, kind="stable")

    best_side, best_value = None, np.inf
    for split in range(1, len(order)):
        side = np.zeros(len(order), dtype=bool)
        side[order[:split]] = True
        value = normalized_cut_value(values, side)
        if value < best_value:
            best_side, best_value = side, value

    side, refined = _refine(values, best_side, best_value)
    if refined < best_value:
        logger.debug("local moves lowered the normalized cut from %.6g to %.6g", best_value, refined)
    return tuple(bool(c) for c in side)


def normalized_cut_value(pi: AffinityMatrix | np.ndarray, coloring: tuple[bool, ...]) -> float:
    """``cut(A, B) / assoc(A, V) + cut(A, B) / assoc(B, V)``."""
    values = _as_array(pi)
    side = np.asarray(coloring, dtype=bool)
    if side.all() or not side.any():
        raise ValueError("coloring must put at least one segment on each side")
    cut = values[np.ix_(side, ~side)].sum()
    return float(cut / values[side].sum() + cut / values[~side].sum())


def _border_mask(shape: tuple[int, int]) -> np.ndarray:
    border = np.zeros(shape, dtype=bool)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    return border


def select_foreground(coloring: tuple[bool, ...], masks: SoftMasks) -> LabelMap:
    """Binary foreground from a colouring of the argmax components.

    The side covering fewer border pixels is foreground; ties go to the
    smaller side, then to the side containing component 0.
    """
    if len(coloring) != masks.K:
        raise DimensionMismatch(f"{len(coloring)} colours for {masks.K} components")
    labels = masks.argmax().data
    side = np.asarray(coloring, dtype=bool)[labels]
    border = _border_mask(masks.shape)

    border_true = int(np.count_nonzero(side & border))
    border_false = int(np.count_nonzero(~side & border))
    if border_true != border_false:
        pick_true = border_true < border_false
    else:
        area_true = int(np.count_nonzero(side))
        area_false = side.size - area_true
        if area_true != area_false:
            pick_true = area_true < area_false
        else:
            pick_true = bool(coloring[0])
    return LabelMap(side if pick_true else ~side)


def merge_masks(
    masks: SoftMasks,
    features: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
    weight_floor: float | None = None,
) -> MergeResult:
    """Foreground mask of one frame.

    K = 2 skips the affinity graph (method "identity"). If fewer than two
    components carry mass, the heaviest component is set against the rest
    (method "fallback").
    """
    if masks.K == 2:
        coloring = (True, False)
        method = METHOD_IDENTITY
    else:
        sf = pool_features(features, masks, weight_floor)
        try:
            coloring = spectral_bipartition(affinity(sf, epsilon))
            method = METHOD_SPECTRAL
        except AllDegenerate as e:
            logger.warning("%s; splitting off the heaviest component", e)
            heaviest = int(np.argmax(sf.mass))
            coloring = tuple(k == heaviest for k in range(masks.K))
            method = METHOD_FALLBACK
    return MergeResult(
        foreground=select_foreground(coloring, masks), coloring=tuple(coloring), method=method
    )
