"""Render sprite scenes with analytic ground-truth flow.

Randomness comes from independent SplitMix64 streams: sprite ``i`` samples
its size and starting centre from ``split(seed, 1000 + i)`` and frame ``t``
draws its flow noise from ``split(seed, t)``. Frames are rendered in
parallel once every sprite trajectory is known.

A sprite occupies ``[cx - w/2, cx + w/2) x [cy - h/2, cy + h/2)`` (its
bounding box, with pixel ``(x, y)`` tested at its integer coordinates).
Between frames the centre moves by the sprite's own flow evaluated at the
centre. Sprites are painted in order over the background, so later sprites
occlude earlier ones.
"""

from __future__ import annotations

import logging

import numpy as np

from gwm_segment.errors import SpriteOutOfBounds
from gwm_segment.flowfield.containers import FlowField, LabelMap, RgbImage
from gwm_segment.motion.models import CoordNormalization, MotionModelParams, residual_map
from gwm_segment.prng import SplitMix64, split_seed
from gwm_segment.scenes.spec import Fill, Scene, SceneSpec, SpritePlacement
from gwm_segment.threads import ordered_map

logger = logging.getLogger(__name__)

SPRITE_STREAM_OFFSET = 1000


def _draw(rng: SplitMix64, bounds: tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1], 1)[0])


def place_sprite(spec: SceneSpec, index: int) -> SpritePlacement:
    """Sample a sprite's size and follow its centre through every frame.

    Raises:
        SpriteOutOfBounds: the bounding box leaves the frame at some frame.
    """
    sprite = spec.sprites[index]
    rng = SplitMix64(split_seed(spec.seed, SPRITE_STREAM_OFFSET + index))
    width = _draw(rng, sprite.size_range[0])
    height = _draw(rng, sprite.size_range[1])
    center = np.array([_draw(rng, sprite.center_range[0]), _draw(rng, sprite.center_range[1])], dtype=np.float64)

    norm = CoordNormalization(spec.width, spec.height)
    centers = []
    for t in range(spec.frames):
        if t:
            center = center + sprite.motion(t - 1).predict(norm.normalize(center))
        left, top = center[0] - width / 2, center[1] - height / 2
        if left < 0 or top < 0 or left + width > spec.width or top + height > spec.height:
            raise SpriteOutOfBounds(
                f"sprite {index} ({width}x{height} at {center[0]:.2f},{center[1]:.2f}) "
                f"leaves the {spec.width}x{spec.height} frame at frame {t}"
            )
        centers.append((float(center[0]), float(center[1])))
    return SpritePlacement(width=width, height=height, centers=tuple(centers))


def sprite_mask(
    shape: str, width: int, height: int, center: tuple[float, float], lattice: tuple[int, int]
) -> np.ndarray:
    """Boolean membership of every pixel of an (H, W) lattice."""
    ys, xs = np.mgrid[0 : lattice[0], 0 : lattice[1]].astype(np.float64)
    cx, cy = center
    if shape == "rectangle":
        return (xs >= cx - width / 2) & (xs < cx + width / 2) & (ys >= cy - height / 2) & (ys < cy + height / 2)
    if shape == "ellipse":
        return ((xs - cx) / (width / 2)) ** 2 + ((ys - cy) / (height / 2)) ** 2 < 1.0
    # apex at the top, base at the bottom
    top = cy - height / 2
    inside_rows = (ys >= top) & (ys < cy + height / 2)
    return inside_rows & (np.abs(xs - cx) <= (width / 2) * (ys - top) / height)


def render_fill(fill: Fill, lattice: tuple[int, int], origin: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Paint a fill over a whole (H, W) lattice; the checker pattern starts at ``origin``."""
    image = np.empty(lattice + (3,), dtype=np.uint8)
    if fill.kind == "flat":
        image[...] = fill.colors[0]
        return image
    ys, xs = np.mgrid[0 : lattice[0], 0 : lattice[1]]
    cells = np.floor((xs - origin[0]) / fill.cell) + np.floor((ys - origin[1]) / fill.cell)
    odd = cells.astype(np.int64) % 2 == 1
    image[~odd] = fill.colors[0]
    image[odd] = fill.colors[1]
    return image


def _render_frame(
    spec: SceneSpec, placements: tuple[SpritePlacement, ...], t: int
) -> tuple[RgbImage, FlowField, LabelMap, LabelMap]:
    lattice = (spec.height, spec.width)
    grid = CoordNormalization(spec.width, spec.height).grid()

    image = render_fill(spec.background.fill, lattice)
    flow = spec.background.motion(t).predict(grid)
    labels = np.zeros(lattice, dtype=np.int32)
    for i, (sprite, placement) in enumerate(zip(spec.sprites, placements)):
        center = placement.centers[t]
        mask = sprite_mask(sprite.shape, placement.width, placement.height, center, lattice)
        origin = (center[0] - placement.width / 2, center[1] - placement.height / 2)
        image[mask] = render_fill(sprite.fill, lattice, origin)[mask]
        flow[mask] = sprite.motion(t).predict(grid[mask])
        labels[mask] = i + 1

    if spec.noise_sigma > 0:
        rng = SplitMix64(split_seed(spec.seed, t))
        flow = flow + rng.normal(flow.size, spec.noise_sigma).reshape(flow.shape)
    return RgbImage(image), FlowField(flow), LabelMap(labels), LabelMap(labels > 0)


def generate(spec: SceneSpec) -> Scene:
    """Render every frame of ``spec``; the same spec and seed give the same scene.

    Raises:
        SpriteOutOfBounds: a sprite leaves the frame.
    """
    placements = tuple(place_sprite(spec, i) for i in range(len(spec.sprites)))
    rendered = ordered_map(lambda t: _render_frame(spec, placements, t), range(spec.frames))
    images, flows, labels, foreground = (tuple(part) for part in zip(*rendered))
    logger.info(
        "generated scene %r: %dx%d, %d frame(s), %d sprite(s)",
        spec.name, spec.width, spec.height, spec.frames, len(spec.sprites),
    )
    return Scene(spec, images, flows, labels, foreground, placements)


def _region_models(spec: SceneSpec, t: int) -> list[MotionModelParams]:
    return [spec.background.motion(t)] + [sprite.motion(t) for sprite in spec.sprites]


def verify_scene(scene: Scene) -> list[str]:
    """Check a scene against its own spec; returns human-readable problems (empty if valid).

    Noise-free flow must match each region's motion model to float32
    precision; noisy flow must have a mean squared residual below
    ``4 sigma^2`` per region.
    """
    spec = scene.spec
    problems: list[str] = []
    lattice = (spec.height, spec.width)
    if not scene.frames == len(scene.flows) == len(scene.labels) == len(scene.foreground) == spec.frames:
        problems.append(f"expected {spec.frames} frames of every kind")
        return problems

    norm = CoordNormalization(spec.width, spec.height)
    bound = 4 * spec.noise_sigma**2 + 1e-6
    for t in range(spec.frames):
        shapes = {
            "image": scene.images[t].shape,
            "flow": scene.flows[t].shape,
            "labels": scene.labels[t].shape,
            "foreground": scene.foreground[t].shape,
        }
        wrong_shapes = [
            f"frame {t}: {kind} is {shape}, expected {lattice}"
            for kind, shape in shapes.items()
            if tuple(shape) != lattice
        ]
        if wrong_shapes:
            problems.extend(wrong_shapes)
            continue

        labels = scene.labels[t].data
        if labels.max() > len(spec.sprites):
            problems.append(f"frame {t}: label {labels.max()} exceeds sprite count")
        if not np.array_equal(scene.foreground[t].data, (labels > 0).astype(np.int32)):
            problems.append(f"frame {t}: foreground is not the union of sprites")

        for label, model in enumerate(_region_models(spec, t)):
            region = labels == label
            if not region.any():
                continue
            residual = residual_map(scene.flows[t], model, norm)[region]
            if spec.noise_sigma == 0:
                worst = float(residual.max())
                if worst > 1e-6:
                    problems.append(f"frame {t}: region {label} departs from its motion model ({worst:.3g} px^2)")
            elif float(residual.mean()) > bound:
                problems.append(f"frame {t}: region {label} residual {residual.mean():.3g} px^2 exceeds {bound:.3g}")

    for i, placement in enumerate(scene.placements):
        for t, (cx, cy) in enumerate(placement.centers):
            left, top = cx - placement.width / 2, cy - placement.height / 2
            if left < 0 or top < 0 or left + placement.width > spec.width or top + placement.height > spec.height:
                problems.append(f"frame {t}: sprite {i} is outside the frame")
    return problems
