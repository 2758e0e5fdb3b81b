"""Fixed scene presets.

============== ======= === ===== ====================================================
name           size    T   sigma content
============== ======= === ===== ====================================================
smoke          48x48   2   0     one flat rectangle translating over a static background
two-sprites    64x64   4   0.1   textured rectangle and ellipse with distinct affine motions
parallax       64x64   3   0.05  translating sprite over a quadratic depth-gradient background
nonrigid-proxy 64x64   3   0.05  one object made of two rigid parts that move differently
heldout-pair   48x48   4/2 0.05  train/test scenes whose sprites share their appearance
============== ======= === ===== ====================================================
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from gwm_segment.errors import UnknownPreset
from gwm_segment.motion.models import ModelFamily, MotionModelParams
from gwm_segment.scenes.spec import BackgroundSpec, Fill, SceneSpec, SpriteSpec


def translation(bx: float, by: float) -> MotionModelParams:
    return MotionModelParams(ModelFamily.CONSTANT, np.zeros((2, 0)), (bx, by))


def affine(A: list[list[float]], b: tuple[float, float]) -> MotionModelParams:
    return MotionModelParams(ModelFamily.AFFINE, A, b)


def quadratic(A: list[list[float]], b: tuple[float, float]) -> MotionModelParams:
    """Coefficients of ``[x, x^2, y, y^2, xy]`` per output channel."""
    return MotionModelParams(ModelFamily.QUADRATIC12, A, b)


WARM_CHECKER = Fill("checker", ((230, 60, 40), (250, 200, 60)), 3)
BLUE = Fill("flat", ((40, 90, 230),))
GRAY_CHECKER = Fill("checker", ((100, 100, 100), (130, 130, 130)), 8)


def smoke(seed: int = 0) -> SceneSpec:
    sprite = SpriteSpec(
        shape="rectangle",
        size_range=((12, 12), (12, 12)),
        center_range=((18, 22), (18, 22)),
        fill=Fill("flat", ((220, 50, 40),)),
        motions=(translation(2.0, 1.0),),
    )
    background = BackgroundSpec(Fill("flat", ((70, 70, 70),)), (translation(0.0, 0.0),))
    return SceneSpec(48, 48, 2, (sprite,), background, 0.0, seed, "smoke")


def two_sprites(seed: int = 0) -> SceneSpec:
    sprites = (
        SpriteSpec(
            shape="rectangle",
            size_range=((14, 18), (14, 18)),
            center_range=((18, 24), (18, 24)),
            fill=WARM_CHECKER,
            motions=(affine([[0.8, 0.0], [0.0, 0.8]], (1.5, 0.5)),),
        ),
        SpriteSpec(
            shape="ellipse",
            size_range=((14, 18), (14, 18)),
            center_range=((40, 46), (38, 44)),
            fill=BLUE,
            motions=(affine([[0.0, -0.6], [0.6, 0.0]], (-1.0, -1.0)),),
        ),
    )
    background = BackgroundSpec(GRAY_CHECKER, (affine([[0.2, 0.0], [0.0, 0.2]], (0.3, -0.2)),))
    return SceneSpec(64, 64, 4, sprites, background, 0.1, seed, "two-sprites")


def parallax(seed: int = 0) -> SceneSpec:
    sprite = SpriteSpec(
        shape="rectangle",
        size_range=((14, 16), (14, 16)),
        center_range=((28, 36), (26, 34)),
        fill=WARM_CHECKER,
        motions=(translation(1.0, -1.0),),
    )
    # ground-plane parallax: horizontal flow grows with y^2, plus shear in xy
    ground = quadratic([[0.0, 0.0, 0.0, 1.5, 0.0], [0.0, 0.0, 0.0, 0.0, 0.4]], (-0.5, 0.0))
    background = BackgroundSpec(Fill("checker", ((90, 110, 90), (120, 140, 120)), 6), (ground,))
    return SceneSpec(64, 64, 3, (sprite,), background, 0.05, seed, "parallax")


def nonrigid_proxy(seed: int = 0) -> SceneSpec:
    body_fill = Fill("checker", ((220, 60, 60), (250, 210, 70)), 4)
    sprites = (
        SpriteSpec(
            shape="rectangle",
            size_range=((16, 16), (20, 20)),
            center_range=((26, 28), (30, 32)),
            fill=body_fill,
            motions=(translation(1.0, 0.0),),
        ),
        SpriteSpec(
            shape="rectangle",
            size_range=((10, 10), (8, 8)),
            center_range=((38, 40), (30, 32)),
            fill=body_fill,
            motions=(affine([[0.0, -0.8], [0.8, 0.0]], (1.0, -0.5)),),
        ),
    )
    background = BackgroundSpec(
        Fill("checker", ((90, 90, 120), (120, 120, 150)), 8),
        (affine([[0.5, 0.0], [0.0, 0.5]], (0.0, 0.0)),),
    )
    return SceneSpec(64, 64, 3, sprites, background, 0.05, seed, "nonrigid-proxy")


def heldout_pair_specs(seed: int = 0) -> tuple[SceneSpec, SceneSpec]:
    """Training and held-out scenes with identical sprite and background fills.

    The held-out scene uses different positions, motions and seed (seed + 1).
    """
    background_fill = Fill("checker", ((100, 100, 100), (130, 130, 130)), 6)
    train = SceneSpec(
        48, 48, 4,
        (
            SpriteSpec("rectangle", ((10, 14), (10, 14)), ((12, 18), (12, 18)), WARM_CHECKER,
                       (translation(1.5, 1.0),)),
            SpriteSpec("ellipse", ((10, 14), (10, 14)), ((30, 36), (28, 34)), BLUE,
                       (affine([[0.3, 0.0], [0.0, 0.3]], (-1.2, 0.5)),)),
        ),
        BackgroundSpec(background_fill, (translation(-0.5, 0.0),)),
        0.05, seed, "heldout-pair",
    )
    test = SceneSpec(
        48, 48, 2,
        (
            SpriteSpec("rectangle", ((10, 14), (10, 14)), ((16, 22), (14, 20)), WARM_CHECKER,
                       (translation(-1.0, 0.5),)),
            SpriteSpec("ellipse", ((10, 14), (10, 14)), ((28, 34), (30, 36)), BLUE,
                       (translation(1.0, 1.0),)),
        ),
        BackgroundSpec(background_fill, (translation(0.5, 0.5),)),
        0.05, seed + 1, "heldout-pair-test",
    )
    return train, test


def heldout_pair(seed: int = 0) -> SceneSpec:
    return heldout_pair_specs(seed)[0]


PRESETS: dict[str, Callable[[int], SceneSpec]] = {
    "smoke": smoke,
    "two-sprites": two_sprites,
    "parallax": parallax,
    "nonrigid-proxy": nonrigid_proxy,
    "heldout-pair": heldout_pair,
}


def preset(name: str, seed: int = 0) -> SceneSpec:
    """Scene spec of a named preset.

    Raises:
        UnknownPreset: ``name`` is not one of PRESETS.
    """
    try:
        factory = PRESETS[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r} (expected one of: {', '.join(PRESETS)})"
        ) from None
    return factory(seed)
