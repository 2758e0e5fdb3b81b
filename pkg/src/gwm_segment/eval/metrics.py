"""Region Jaccard and oracle foreground assignment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np

from gwm_segment.errors import DimensionMismatch, KTooLarge
from gwm_segment.flowfield.containers import LabelMap, require_same_lattice
from gwm_segment.motion.energy import SoftMasks
from gwm_segment.scenes.spec import Scene
from gwm_segment.threads import ordered_map

MAX_ORACLE_COMPONENTS = 16

MODE_HEURISTIC = "heuristic"
MODE_ORACLE = "oracle"

Mask = Union[LabelMap, np.ndarray]


def _binary(mask: Mask) -> np.ndarray:
    data = mask.data if isinstance(mask, LabelMap) else np.asarray(mask)
    if data.ndim != 2:
        raise DimensionMismatch(f"masks must be 2-D, got shape {data.shape}")
    return data > 0


def jaccard(pred: Mask, gt: Mask) -> float:
    """Intersection over union of two binary masks; 1.0 when both are empty.

    Raises:
        DimensionMismatch: the masks differ in size.
    """
    p, g = _binary(pred), _binary(gt)
    require_same_lattice(p.shape, g.shape)
    union = int(np.count_nonzero(p | g))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(p & g)) / union


def oracle_component_assignment(masks: SoftMasks, gt_fg: Mask) -> tuple[tuple[bool, ...], float]:
    """Best foreground/background labelling of the argmax components.

    Searches all ``2^K - 2`` assignments with at least one component on each
    side; ties go to the assignment whose bitmask (bit k = component k) is
    smallest.

    Returns:
        (assignment, J) where assignment[k] is True for foreground.

    Raises:
        KTooLarge: K > 16.
        DimensionMismatch: masks and GT differ in size.
    """
    K = masks.K
    if K > MAX_ORACLE_COMPONENTS:
        raise KTooLarge(f"oracle assignment enumerates 2^K subsets; K={K} exceeds {MAX_ORACLE_COMPONENTS}")
    if K < 2:
        raise ValueError("oracle assignment needs at least two components")
    gt = _binary(gt_fg)
    require_same_lattice(masks.shape, gt.shape)

    labels = masks.argmax().data
    area = np.bincount(labels.ravel(), minlength=K).astype(np.int64)
    overlap = np.bincount(labels[gt], minlength=K).astype(np.int64)
    gt_area = int(np.count_nonzero(gt))

    codes = np.arange(1, (1 << K) - 1, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(K)) & 1
    inter = bits @ overlap
    union = gt_area + bits @ area - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(union > 0, inter / np.maximum(union, 1), 1.0)
    best = int(np.argmax(scores))
    return tuple(bool(b) for b in bits[best]), float(scores[best])


def assignment_mask(masks: SoftMasks, assignment: Sequence[bool]) -> LabelMap:
    """Binary mask of pixels whose argmax component is marked foreground."""
    return LabelMap(np.asarray(assignment, dtype=bool)[masks.argmax().data])


def oracle_predictions(masks: Sequence[SoftMasks], scene: Scene) -> list[LabelMap]:
    """Per-frame binary predictions from the oracle assignment against the scene's GT."""
    if len(masks) != scene.frames:
        raise DimensionMismatch(f"{len(masks)} mask frame(s) for a {scene.frames}-frame scene")

    def frame(t: int) -> LabelMap:
        assignment, _ = oracle_component_assignment(masks[t], scene.foreground[t])
        return assignment_mask(masks[t], assignment)

    return ordered_map(frame, range(scene.frames))


@dataclass(frozen=True)
class JaccardReport:
    per_frame: tuple[float, ...]
    mode: str = MODE_HEURISTIC
    mean: float = field(init=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.per_frame)
        object.__setattr__(self, "per_frame", values)
        object.__setattr__(self, "mean", math.fsum(values) / len(values) if values else 0.0)

    @property
    def frames(self) -> int:
        return len(self.per_frame)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "frames": self.frames,
            "mean_jaccard": self.mean,
            "per_frame": list(self.per_frame),
        }

    def to_text(self) -> str:
        lines = [f"{'frame':>5}  {'J':>8}"]
        lines += [f"{t:>5}  {j:>8.4f}" for t, j in enumerate(self.per_frame)]
        lines.append(f"{'mean':>5}  {self.mean:>8.4f}  ({self.mode}, {self.frames} frame(s))")
        return "\n".join(lines)


def evaluate_run(scene: Scene, predictions: Sequence[Mask], mode: str = MODE_HEURISTIC) -> JaccardReport:
    """Jaccard of each predicted foreground against the scene's GT foreground.

    Raises:
        DimensionMismatch: frame counts or frame sizes differ.
    """
    if len(predictions) != scene.frames:
        raise DimensionMismatch(f"{len(predictions)} prediction(s) for a {scene.frames}-frame scene")
    scores = ordered_map(lambda t: jaccard(predictions[t], scene.foreground[t]), range(scene.frames))
    return JaccardReport(per_frame=tuple(scores), mode=mode)
