"""Synthetic sprite scenes with exact flow and instance masks."""

from gwm_segment.scenes.generator import generate, verify_scene
from gwm_segment.scenes.presets import PRESETS, heldout_pair_specs, preset
from gwm_segment.scenes.spec import BackgroundSpec, Fill, Scene, SceneSpec, SpriteSpec
from gwm_segment.scenes.storage import SceneDirectory, load_scene, save_scene

__all__ = [
    "PRESETS",
    "BackgroundSpec",
    "Fill",
    "Scene",
    "SceneDirectory",
    "SceneSpec",
    "SpriteSpec",
    "generate",
    "heldout_pair_specs",
    "load_scene",
    "preset",
    "save_scene",
    "verify_scene",
]
