"""Motion-anticipation loss over soft masks, its gradient, and a finite-difference verifier.

For a frame with flow ``F`` and soft masks ``p_uk`` the loss is

    L = (1 / |Omega|) * sum_k min_theta_k sum_u p_uk ||F_u - A_k lift(u) - b_k||^2

The inner minimum is the closed-form weighted least-squares fit of
``motion.solver``. The loss is linear in ``p`` for fixed ``theta``, so with
``theta*`` held at the minimizer ``dL/dp_uk = r_uk / |Omega|`` and, through
the softmax, ``dL/dz_uk = p_uk (r_uk - sum_j p_uj r_uj) / |Omega|``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from gwm_segment.errors import DimensionMismatch, EmptyDataset, NonFiniteLogit
from gwm_segment.flowfield.containers import FlowField, LabelMap, require_same_lattice
from gwm_segment.motion.models import (
    CoordNormalization,
    ModelFamily,
    MotionModelParams,
    residual_map,
)
from gwm_segment.motion.solver import fit_wls
from gwm_segment.threads import ordered_map

logger = logging.getLogger(__name__)

# components with mass below WEIGHT_FLOOR_SCALE * |Omega| are degenerate
WEIGHT_FLOOR_SCALE = 1e-8
PROB_SUM_TOLERANCE = 1e-6


def softmax(logits: np.ndarray) -> np.ndarray:
    """Softmax over the last axis."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class SoftMasks:
    """Per-pixel K-way probabilities, shape (H, W, K)."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        if probs.ndim != 3 or probs.shape[2] < 1:
            raise DimensionMismatch(f"masks must have shape (H, W, K>=1), got {probs.shape}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("mask probabilities must be finite and non-negative")
        if np.max(np.abs(probs.sum(axis=-1) - 1.0)) > PROB_SUM_TOLERANCE:
            raise ValueError("mask probabilities must sum to 1 at every pixel")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def K(self) -> int:
        return self.probs.shape[2]

    @property
    def width(self) -> int:
        return self.probs.shape[1]

    @property
    def height(self) -> int:
        return self.probs.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape[:2]

    @classmethod
    def from_logits(cls, logits: np.ndarray) -> SoftMasks:
        return cls(softmax(logits))

    @classmethod
    def from_labels(cls, labels: LabelMap | np.ndarray, K: int | None = None) -> SoftMasks:
        """Hard one-hot masks from component labels 0..K-1."""
        data = labels.data if isinstance(labels, LabelMap) else np.asarray(labels)
        K = int(data.max()) + 1 if K is None else K
        return cls(np.eye(K)[data])

    @classmethod
    def uniform(cls, width: int, height: int, K: int) -> SoftMasks:
        return cls(np.full((height, width, K), 1.0 / K))

    def component(self, k: int) -> np.ndarray:
        return self.probs[..., k]

    def mass(self) -> np.ndarray:
        """Total probability of each component, shape (K,)."""
        return self.probs.sum(axis=(0, 1))

    def argmax(self) -> LabelMap:
        """Hard component labels 0..K-1."""
        return LabelMap(self.probs.argmax(axis=-1))

    def permuted(self, order: Sequence[int]) -> SoftMasks:
        """Masks whose component j is this mask's component ``order[j]``."""
        return SoftMasks(self.probs[..., list(order)])


@dataclass(frozen=True, eq=False)
class EnergyReport:
    """Loss of one frame.

    Attributes:
        total: Loss divided by |Omega| (px^2 per pixel).
        per_component: Fitted model of each component.
        residuals: Per-component residual maps, shape (K, H, W).
    """

    total: float
    per_component: tuple[MotionModelParams, ...]
    residuals: np.ndarray

    @property
    def K(self) -> int:
        return len(self.per_component)


def resolve_weight_floor(num_pixels: int, weight_floor: float | None) -> float:
    return WEIGHT_FLOOR_SCALE * num_pixels if weight_floor is None else float(weight_floor)


def gwm_loss(
    flow: FlowField,
    masks: SoftMasks,
    family: ModelFamily | str,
    ridge: float | None = None,
    weight_floor: float | None = None,
    norm: CoordNormalization | None = None,
) -> EnergyReport:
    """Fit one motion model per component and report the per-pixel loss.

    Components whose mass is below ``weight_floor`` (default
    ``1e-8 * |Omega|``) contribute zero energy and are flagged degenerate;
    their residual map comes from the uniform-weight fit of the whole frame.

    Raises:
        DimensionMismatch: masks and flow lattices differ.
    """
    require_same_lattice(flow.shape, masks.shape)
    family = ModelFamily.parse(family)
    norm = norm or CoordNormalization.for_shape(flow.shape)
    num_pixels = flow.width * flow.height
    floor = resolve_weight_floor(num_pixels, weight_floor)

    fallback: MotionModelParams | None = None
    params: list[MotionModelParams] = []
    residuals = np.empty((masks.K,) + flow.shape)
    for k in range(masks.K):
        weights = masks.component(k)
        mass = float(weights.sum())
        if mass < floor:
            if fallback is None:
                fallback = fit_wls(flow, np.ones(flow.shape), family, norm, ridge)
            logger.debug("component %d is degenerate (mass %.3g < %.3g)", k, mass, floor)
            fitted = MotionModelParams(
                family, fallback.A, fallback.b, energy=0.0, weight_total=mass, degenerate=True
            )
        else:
            fitted = fit_wls(flow, weights, family, norm, ridge)
        params.append(fitted)
        residuals[k] = residual_map(flow, fitted, norm)

    total = math.fsum(p.energy for p in params) / num_pixels
    return EnergyReport(total=total, per_component=tuple(params), residuals=residuals)


def _check_logits(flow: FlowField, logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 3 or z.shape[:2] != tuple(flow.shape):
        raise DimensionMismatch(f"logits shape {z.shape} does not match flow {flow.shape}")
    if not np.all(np.isfinite(z)):
        raise NonFiniteLogit("logits contain NaN or Inf")
    return z


def gwm_grad_logits(
    flow: FlowField,
    logits: np.ndarray,
    family: ModelFamily | str,
    ridge: float | None = None,
    weight_floor: float | None = None,
    norm: CoordNormalization | None = None,
) -> tuple[EnergyReport, np.ndarray]:
    """Loss and its gradient with respect to per-pixel logits (H, W, K).

    The fitted models are held fixed during differentiation; this is the
    exact gradient wherever the inner minimizer is unique.

    Raises:
        NonFiniteLogit: logits contain NaN or Inf.
    """
    z = _check_logits(flow, logits)
    probs = softmax(z)
    report = gwm_loss(flow, SoftMasks(probs), family, ridge, weight_floor, norm)
    r = np.moveaxis(report.residuals, 0, -1)
    mean_r = np.sum(probs * r, axis=-1, keepdims=True)
    grad = probs * (r - mean_r) / (flow.width * flow.height)
    return report, grad


def finite_difference_grad(
    flow: FlowField,
    logits: np.ndarray,
    family: ModelFamily | str,
    ridge: float | None = None,
    weight_floor: float | None = None,
    step: float = 1e-4,
    sites: Iterable[tuple[int, int, int]] | None = None,
) -> np.ndarray:
    """Central differences of ``gwm_loss(softmax(logits))``.

    Args:
        sites: (y, x, k) entries to differentiate; all entries when None.
            Entries not listed are left as NaN.
    """
    z = _check_logits(flow, logits).copy()
    norm = CoordNormalization.for_shape(flow.shape)

    def loss(values: np.ndarray) -> float:
        return gwm_loss(flow, SoftMasks.from_logits(values), family, ridge, weight_floor, norm).total

    numeric = np.full(z.shape, np.nan)
    sites = np.ndindex(*z.shape) if sites is None else sites
    for site in sites:
        original = z[site]
        z[site] = original + step
        plus = loss(z)
        z[site] = original - step
        minus = loss(z)
        z[site] = original
        numeric[site] = (plus - minus) / (2 * step)
    return numeric


def gradient_check(
    flow: FlowField,
    logits: np.ndarray,
    family: ModelFamily | str,
    ridge: float | None = None,
    weight_floor: float | None = None,
    step: float = 1e-4,
    sites: Iterable[tuple[int, int, int]] | None = None,
) -> float:
    """Max relative error between analytic and finite-difference gradients.

    Relative to the largest numeric gradient magnitude (floored at 1e-12).
    """
    _, analytic = gwm_grad_logits(flow, logits, family, ridge, weight_floor)
    numeric = finite_difference_grad(flow, logits, family, ridge, weight_floor, step, sites)
    checked = np.isfinite(numeric)
    scale = max(float(np.max(np.abs(numeric[checked]))), 1e-12)
    return float(np.max(np.abs(analytic[checked] - numeric[checked]))) / scale


MasksSource = Union[SoftMasks, Callable[[], SoftMasks]]


def dataset_risk(
    frames: Sequence[tuple[FlowField, MasksSource]],
    family: ModelFamily | str,
    ridge: float | None = None,
    weight_floor: float | None = None,
) -> float:
    """Empirical risk: mean of per-frame losses.

    Args:
        frames: (flow, masks) pairs; masks may be a zero-argument callable.

    Raises:
        EmptyDataset: no frames.
    """
    if not frames:
        raise EmptyDataset("dataset_risk needs at least one frame")

    def frame_loss(item: tuple[FlowField, MasksSource]) -> float:
        flow, source = item
        masks = source() if callable(source) else source
        return gwm_loss(flow, masks, family, ridge, weight_floor).total

    losses = ordered_map(frame_loss, frames)
    return math.fsum(losses) / len(losses)
