"""Scene descriptions: sprites, fills, motion trajectories and the generated frames."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from gwm_segment.errors import ConfigError, DimensionOverflow
from gwm_segment.flowfield.containers import FlowField, LabelMap, RgbImage, check_dimensions
from gwm_segment.motion.models import MotionModelParams

SHAPES = ("rectangle", "ellipse", "triangle")
FILL_KINDS = ("flat", "checker")

Color = tuple[int, int, int]


def _color(value: Any) -> Color:
    color = tuple(int(c) for c in value)
    if len(color) != 3 or any(not 0 <= c <= 255 for c in color):
        raise ConfigError(f"colour must be three values in 0..255, got {value!r}")
    return color


def _range(value: Any, name: str) -> tuple[int, int]:
    low, high = (int(v) for v in value)
    if low > high:
        raise ConfigError(f"{name} range is empty: {low} > {high}")
    return low, high


@dataclass(frozen=True)
class Fill:
    """Flat colour, or a checkerboard of two colours with square cells."""

    kind: str = "flat"
    colors: tuple[Color, ...] = ((128, 128, 128),)
    cell: int = 4

    def __post_init__(self):
        if self.kind not in FILL_KINDS:
            raise ConfigError(f"unknown fill kind {self.kind!r} (expected one of {FILL_KINDS})")
        colors = tuple(_color(c) for c in self.colors)
        needed = 1 if self.kind == "flat" else 2
        if len(colors) != needed:
            raise ConfigError(f"{self.kind} fill needs {needed} colour(s), got {len(colors)}")
        if self.cell < 1:
            raise ConfigError(f"checker cell must be >= 1, got {self.cell}")
        object.__setattr__(self, "colors", colors)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "colors": [list(c) for c in self.colors], "cell": self.cell}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> Fill:
        return cls(payload["kind"], tuple(tuple(c) for c in payload["colors"]), int(payload.get("cell", 4)))


def _motions(values: Any) -> tuple[MotionModelParams, ...]:
    motions = tuple(values)
    if not motions:
        raise ConfigError("a motion trajectory needs at least one model")
    return motions


@dataclass(frozen=True)
class SpriteSpec:
    """One moving sprite.

    Width, height and centre are drawn uniformly (inclusive integer ranges)
    from the sprite's own PRNG stream. ``motions`` holds one flow model per
    frame step; a single model is reused for every step.
    """

    shape: str
    size_range: tuple[tuple[int, int], tuple[int, int]]
    center_range: tuple[tuple[int, int], tuple[int, int]]
    fill: Fill
    motions: tuple[MotionModelParams, ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError(f"unknown sprite shape {self.shape!r} (expected one of {SHAPES})")
        sizes = (_range(self.size_range[0], "width"), _range(self.size_range[1], "height"))
        if sizes[0][0] < 1 or sizes[1][0] < 1:
            raise ConfigError("sprite sizes must be >= 1")
        centers = (_range(self.center_range[0], "centre x"), _range(self.center_range[1], "centre y"))
        object.__setattr__(self, "size_range", sizes)
        object.__setattr__(self, "center_range", centers)
        object.__setattr__(self, "motions", _motions(self.motions))

    def motion(self, step: int) -> MotionModelParams:
        return self.motions[min(step, len(self.motions) - 1)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "shape": self.shape,
            "size_range": [list(r) for r in self.size_range],
            "center_range": [list(r) for r in self.center_range],
            "fill": self.fill.to_dict(),
            "motions": [m.to_dict() for m in self.motions],
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> SpriteSpec:
        return cls(
            shape=payload["shape"],
            size_range=tuple(tuple(r) for r in payload["size_range"]),
            center_range=tuple(tuple(r) for r in payload["center_range"]),
            fill=Fill.from_dict(payload["fill"]),
            motions=tuple(MotionModelParams.from_dict(m) for m in payload["motions"]),
        )


@dataclass(frozen=True)
class BackgroundSpec:
    fill: Fill = field(default_factory=Fill)
    motions: tuple[MotionModelParams, ...] = (MotionModelParams.zero("constant"),)

    def __post_init__(self):
        object.__setattr__(self, "motions", _motions(self.motions))

    def motion(self, step: int) -> MotionModelParams:
        return self.motions[min(step, len(self.motions) - 1)]

    def to_dict(self) -> dict[str, Any]:
        return {"fill": self.fill.to_dict(), "motions": [m.to_dict() for m in self.motions]}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> BackgroundSpec:
        return cls(
            fill=Fill.from_dict(payload["fill"]),
            motions=tuple(MotionModelParams.from_dict(m) for m in payload["motions"]),
        )


@dataclass(frozen=True)
class SceneSpec:
    """Everything needed to regenerate a scene bit for bit.

    Attributes:
        width, height: Frame size in pixels.
        frames: Frame count T; frame t carries the flow from t to t+1.
        sprites: Painted in order, later sprites on top.
        background: Fill and camera motion of the background.
        noise_sigma: Std-dev (px) of the Gaussian noise added to each flow channel.
        seed: PRNG seed.
        name: Preset name or free label.
    """

    width: int
    height: int
    frames: int
    sprites: tuple[SpriteSpec, ...]
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    noise_sigma: float = 0.0
    seed: int = 0
    name: str = "custom"

    def __post_init__(self):
        try:
            check_dimensions(self.width, self.height)
        except DimensionOverflow as e:
            raise ConfigError(str(e)) from None
        if self.frames < 1:
            raise ConfigError(f"frames must be >= 1, got {self.frames}")
        if not self.sprites:
            raise ConfigError("a scene needs at least one sprite")
        if not self.noise_sigma >= 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        object.__setattr__(self, "sprites", tuple(self.sprites))

    def with_seed(self, seed: int) -> SceneSpec:
        return SceneSpec(
            self.width, self.height, self.frames, self.sprites,
            self.background, self.noise_sigma, seed, self.name,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "width": self.width,
            "height": self.height,
            "frames": self.frames,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
            "background": self.background.to_dict(),
            "sprites": [s.to_dict() for s in self.sprites],
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> SceneSpec:
        try:
            return cls(
                width=int(payload["width"]),
                height=int(payload["height"]),
                frames=int(payload["frames"]),
                sprites=tuple(SpriteSpec.from_dict(s) for s in payload["sprites"]),
                background=BackgroundSpec.from_dict(payload["background"]),
                noise_sigma=float(payload.get("noise_sigma", 0.0)),
                seed=int(payload.get("seed", 0)),
                name=str(payload.get("name", "custom")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid scene description: {e}") from e


@dataclass(frozen=True)
class SpritePlacement:
    """Sampled geometry of one sprite: size and per-frame centres (px)."""

    width: int
    height: int
    centers: tuple[tuple[float, float], ...]


@dataclass(frozen=True, eq=False)
class Scene:
    """Generated frames with exact ground truth.

    Attributes:
        images: Rendered RGB frames.
        flows: Ground-truth flow of each frame (noise included).
        labels: Instance labels, 0 background and sprite i as i + 1.
        foreground: Binary union of all sprites.
    """

    spec: SceneSpec
    images: tuple[RgbImage, ...]
    flows: tuple[FlowField, ...]
    labels: tuple[LabelMap, ...]
    foreground: tuple[LabelMap, ...]
    placements: tuple[SpritePlacement, ...] = ()

    @property
    def frames(self) -> int:
        return len(self.images)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scene):
            return NotImplemented
        return (
            self.spec.to_dict() == other.spec.to_dict()
            and self.images == other.images
            and self.flows == other.flows
            and self.labels == other.labels
            and self.foreground == other.foreground
        )
