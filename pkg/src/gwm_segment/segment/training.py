"""Full-batch momentum gradient descent on the dataset risk.

Two parameterizations are trained here:

* ``perpixel``: free logits per frame. The update uses the gradient of each
  frame's un-normalized energy (risk gradient times ``T * |Omega|``) so the
  learning rate does not depend on resolution or frame count.
* ``linear``: one weight matrix shared by all frames, logits ``W phi_u``;
  the update uses the plain risk gradient with respect to ``W``.

Per-frame gradients are computed in parallel; the reduction and the update
run in frame order so a seed reproduces the loss trace bit for bit.

Descent without spatial structure settles in whichever basin the first few
steps pick, so per-pixel logits start as smooth random fields and training
is restarted from split seeds, keeping the lowest final loss.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Sequence, Union

import numpy as np

from gwm_segment.errors import ConfigError, DimensionMismatch, DivergedLoss, EmptyDataset
from gwm_segment.flowfield.containers import FlowField, RgbImage, require_same_lattice
from gwm_segment.motion.energy import gwm_grad_logits
from gwm_segment.motion.models import CoordNormalization, ModelFamily, design_matrix
from gwm_segment.prng import SplitMix64, split_seed
from gwm_segment.segment.features import FeatureSpec, featurize
from gwm_segment.segment.segmenter import LinearFeatureSegmenter, PerPixelSegmenter
from gwm_segment.threads import ordered_map

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    PERPIXEL = "perpixel"
    LINEAR = "linear"

    @classmethod
    def parse(cls, value: Mode | str) -> Mode:
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown mode {value!r} (expected one of: {choices})") from None


DEFAULT_LEARNING_RATES = {Mode.PERPIXEL: 0.5, Mode.LINEAR: 0.1}


class InitKind(str, Enum):
    """Per-pixel logit initialization.

    ``smooth`` draws each component's logit field as a random quadratic
    polynomial of the normalized coordinates, so components start out as
    distinct spatial regions. ``noise`` draws every logit independently.
    """

    SMOOTH = "smooth"
    NOISE = "noise"

    @classmethod
    def parse(cls, value: InitKind | str) -> InitKind:
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown init {value!r} (expected one of: {choices})") from None


DEFAULT_INIT_SCALES = {InitKind.SMOOTH: 1.0, InitKind.NOISE: 0.01}


@dataclass(frozen=True)
class TrainConfig:
    """Training hyper-parameters.

    ``learning_rate=None`` picks the mode default (0.5 per-pixel, 0.1 linear).
    ``init_scale=None`` picks 1.0 for smooth per-pixel fields and 0.01 for
    independent draws; linear weights are always drawn independently.
    Training runs ``restarts`` times from split seeds and keeps the run with
    the lowest final loss.
    """

    family: ModelFamily = ModelFamily.QUADRATIC12
    K: int = 4
    iterations: int = 300
    learning_rate: float | None = None
    momentum: float = 0.9
    seed: int = 0
    init: InitKind = InitKind.SMOOTH
    init_scale: float | None = None
    restarts: int = 4
    ridge: float | None = None
    weight_floor: float | None = None
    feature_spec: FeatureSpec = field(default_factory=FeatureSpec)

    def __post_init__(self):
        object.__setattr__(self, "family", ModelFamily.parse(self.family))
        object.__setattr__(self, "init", InitKind.parse(self.init))
        if self.K < 2:
            raise ConfigError(f"K must be >= 2, got {self.K}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.learning_rate is not None and not 0 < self.learning_rate < math.inf:
            raise ConfigError(f"learning_rate must be finite and > 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.init_scale is not None and not self.init_scale >= 0:
            raise ConfigError(f"init_scale must be >= 0, got {self.init_scale}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.ridge is not None and not self.ridge >= 0:
            raise ConfigError(f"ridge must be >= 0, got {self.ridge}")
        if self.weight_floor is not None and not self.weight_floor >= 0:
            raise ConfigError(f"weight_floor must be >= 0, got {self.weight_floor}")

    def rate(self, mode: Mode | str) -> float:
        if self.learning_rate is not None:
            return float(self.learning_rate)
        return DEFAULT_LEARNING_RATES[Mode.parse(mode)]

    def init_kind(self, mode: Mode | str) -> InitKind:
        return self.init if Mode.parse(mode) is Mode.PERPIXEL else InitKind.NOISE

    def scale(self, mode: Mode | str) -> float:
        if self.init_scale is not None:
            return float(self.init_scale)
        return DEFAULT_INIT_SCALES[self.init_kind(mode)]

    def to_dict(self, mode: Mode | str | None = None) -> dict[str, Any]:
        """Config echo with every default materialized."""
        payload = asdict(self)
        payload["family"] = self.family.value
        payload["init"] = self.init.value
        if mode is not None:
            payload["learning_rate"] = self.rate(mode)
            payload["init_scale"] = self.scale(mode)
        return payload


Segmenter = Union[PerPixelSegmenter, LinearFeatureSegmenter]


@dataclass(frozen=True, eq=False)
class TrainResult:
    """Outcome of train_internal.

    Attributes:
        segmenter: Trained parameters.
        loss_trace: Risk at the parameters before each update.
        final_loss: Risk after the last update.
        restart: Index of the kept restart.
    """

    segmenter: Segmenter
    mode: Mode
    loss_trace: tuple[float, ...]
    final_loss: float
    restart: int = 0


def _check_frames(frames: Sequence[tuple[RgbImage, FlowField]]) -> None:
    if not frames:
        raise EmptyDataset("training needs at least one frame")
    for t, (image, flow) in enumerate(frames):
        try:
            require_same_lattice(image.shape, flow.shape)
        except DimensionMismatch as e:
            raise DimensionMismatch(f"frame {t}: {e}") from None


def _checked(loss: float, iteration: int) -> float:
    if not math.isfinite(loss):
        raise DivergedLoss(
            f"non-finite loss at iteration {iteration}; lower the learning rate"
        )
    return loss


class _Problem:
    """Risk and gradient for one parameterization; params is a list of arrays."""

    def __init__(self, frames: Sequence[tuple[RgbImage, FlowField]], cfg: TrainConfig):
        self.flows = [flow for _, flow in frames]
        self.norms = [CoordNormalization.for_shape(flow.shape) for flow in self.flows]
        self.cfg = cfg

    def frame_grad(self, t: int, logits: np.ndarray) -> tuple[float, np.ndarray]:
        report, grad = gwm_grad_logits(
            self.flows[t],
            logits,
            self.cfg.family,
            self.cfg.ridge,
            self.cfg.weight_floor,
            self.norms[t],
        )
        return report.total, grad


class _PerPixelProblem(_Problem):
    def init(self, rng: SplitMix64) -> list[np.ndarray]:
        scale = self.cfg.scale(Mode.PERPIXEL)
        params = []
        for flow, norm in zip(self.flows, self.norms):
            K = self.cfg.K
            if self.cfg.init_kind(Mode.PERPIXEL) is InitKind.SMOOTH:
                basis = design_matrix(norm, ModelFamily.QUADRATIC12)
                coeffs = rng.normal(basis.shape[1] * K, scale).reshape(basis.shape[1], K)
                params.append((basis @ coeffs).reshape(flow.shape + (K,)))
            else:
                params.append(rng.normal(flow.height * flow.width * K, scale).reshape(flow.shape + (K,)))
        return params

    def risk_and_grad(self, params: list[np.ndarray]) -> tuple[float, list[np.ndarray]]:
        results = ordered_map(lambda t: self.frame_grad(t, params[t]), range(len(params)))
        risk = math.fsum(loss for loss, _ in results) / len(results)
        grads = [grad * (flow.width * flow.height) for (_, grad), flow in zip(results, self.flows)]
        return risk, grads

    def build(self, params: list[np.ndarray], images: Sequence[RgbImage]) -> PerPixelSegmenter:
        return PerPixelSegmenter(
            logits=tuple(p.copy() for p in params),
            frame_ids=tuple(image.digest() for image in images),
        )


class _LinearProblem(_Problem):
    def __init__(self, frames: Sequence[tuple[RgbImage, FlowField]], cfg: TrainConfig):
        super().__init__(frames, cfg)
        self.features = ordered_map(lambda image: featurize(image, cfg.feature_spec), [i for i, _ in frames])

    def init(self, rng: SplitMix64) -> list[np.ndarray]:
        dim = self.cfg.feature_spec.dim
        return [rng.normal(self.cfg.K * dim, self.cfg.scale(Mode.LINEAR)).reshape(self.cfg.K, dim)]

    def risk_and_grad(self, params: list[np.ndarray]) -> tuple[float, list[np.ndarray]]:
        (weights,) = params

        def frame(t: int) -> tuple[float, np.ndarray]:
            phi = self.features[t]
            loss, grad = self.frame_grad(t, phi @ weights.T)
            return loss, grad.reshape(-1, self.cfg.K).T @ phi.reshape(-1, phi.shape[-1])

        results = ordered_map(frame, range(len(self.features)))
        risk = math.fsum(loss for loss, _ in results) / len(results)
        total = np.zeros_like(weights)
        for _, grad in results:
            total += grad
        return risk, [total / len(results)]

    def build(self, params: list[np.ndarray], images: Sequence[RgbImage]) -> LinearFeatureSegmenter:
        return LinearFeatureSegmenter(self.cfg.feature_spec, params[0].copy())


def train_internal(
    frames: Sequence[tuple[RgbImage, FlowField]],
    cfg: TrainConfig | None = None,
    mode: Mode | str = Mode.PERPIXEL,
    log_every: int = 50,
) -> TrainResult:
    """Optimize a segmenter so that its masks minimize the dataset risk.

    Args:
        frames: (image, flow) pairs sharing a lattice within each pair.
        cfg: Hyper-parameters; defaults to TrainConfig().
        mode: "perpixel" or "linear".
        log_every: Log progress at INFO every this many iterations.

    Returns:
        TrainResult with the trained segmenter and its loss trace.

    Raises:
        EmptyDataset: no frames.
        DimensionMismatch: an image and its flow differ in size.
        DivergedLoss: the loss became NaN or Inf.
    """
    cfg = cfg or TrainConfig()
    mode = Mode.parse(mode)
    _check_frames(frames)
    problem = _PerPixelProblem(frames, cfg) if mode is Mode.PERPIXEL else _LinearProblem(frames, cfg)

    rate = cfg.rate(mode)
    logger.info(
        "training %s segmenter: %d frame(s), K=%d, family=%s, %d iterations, lr=%g, %d restart(s)",
        mode.value, len(frames), cfg.K, cfg.family.value, cfg.iterations, rate, cfg.restarts,
    )
    best: tuple[list[np.ndarray], list[float], float, int] | None = None
    for restart in range(cfg.restarts):
        # restart 0 draws from the seed itself
        rng = SplitMix64(cfg.seed if restart == 0 else split_seed(cfg.seed, restart))
        params, trace, final_loss = _descend(problem, problem.init(rng), cfg, rate, log_every)
        logger.info("restart %d: final loss %.6g (initial %.6g)", restart, final_loss, trace[0])
        if best is None or final_loss < best[2]:
            best = (params, trace, final_loss, restart)

    params, trace, final_loss, restart = best
    if cfg.restarts > 1:
        logger.info("keeping restart %d with final loss %.6g", restart, final_loss)
    return TrainResult(
        segmenter=problem.build(params, [image for image, _ in frames]),
        mode=mode,
        loss_trace=tuple(trace),
        final_loss=final_loss,
        restart=restart,
    )


def _descend(
    problem: _Problem, params: list[np.ndarray], cfg: TrainConfig, rate: float, log_every: int
) -> tuple[list[np.ndarray], list[float], float]:
    """Momentum descent from ``params``; returns the parameters, loss trace and final loss."""
    velocity = [np.zeros_like(p) for p in params]
    trace: list[float] = []
    for iteration in range(cfg.iterations):
        risk, grads = problem.risk_and_grad(params)
        trace.append(_checked(risk, iteration))
        if log_every and iteration % log_every == 0:
            logger.info("iteration %d: loss %.6g", iteration, risk)
        for p, v, g in zip(params, velocity, grads):
            v *= cfg.momentum
            v += g
            p -= rate * v
        if not all(np.all(np.isfinite(p)) for p in params):
            raise DivergedLoss(f"parameters overflowed at iteration {iteration}; lower the learning rate")

    final_loss, _ = problem.risk_and_grad(params)
    _checked(final_loss, cfg.iterations)
    return params, trace, final_loss
