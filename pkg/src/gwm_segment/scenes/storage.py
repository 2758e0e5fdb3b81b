"""Scene directory layout.

    <dir>/scene.json        spec echo, seed and sampled sprite placements
    <dir>/frame_0000.ppm    RGB frame
    <dir>/flow_0000.flo     ground-truth flow from frame t to t+1
    <dir>/gt_0000.pgm       instance labels, gray level round(l * 255 / N)
    <dir>/fg_0000.pgm       binary foreground, 0/255
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from gwm_segment.errors import ConfigError, IoFailure, ValidationError
from gwm_segment.flowfield.io import read_flo, read_pgm, read_ppm, write_flo, write_pgm, write_ppm
from gwm_segment.scenes.spec import Scene, SceneSpec, SpritePlacement

logger = logging.getLogger(__name__)

SCENE_SCHEMA_VERSION = 1


class SceneDirectory:
    """Paths and JSON persistence for one scene directory."""

    def __init__(self, base_dir: Path | str):
        self.base_dir = Path(base_dir)
        self.scene_file = self.base_dir / "scene.json"

    def ensure_directories(self) -> None:
        try:
            self.base_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise IoFailure(f"cannot create {self.base_dir}: {e}") from e

    def frame_path(self, t: int) -> Path:
        return self.base_dir / f"frame_{t:04d}.ppm"

    def flow_path(self, t: int) -> Path:
        return self.base_dir / f"flow_{t:04d}.flo"

    def gt_path(self, t: int) -> Path:
        return self.base_dir / f"gt_{t:04d}.pgm"

    def fg_path(self, t: int) -> Path:
        return self.base_dir / f"fg_{t:04d}.pgm"

    def load_document(self) -> dict[str, Any]:
        """Load scene.json.

        Raises:
            IoFailure: the file is missing or unreadable.
            ValidationError: the document is not a scene description.
        """
        try:
            with open(self.scene_file, "r", encoding="utf-8") as f:
                payload = json.load(f)
        except OSError as e:
            raise IoFailure(f"cannot read {self.scene_file}: {e}") from e
        except json.JSONDecodeError as e:
            raise ValidationError(f"{self.scene_file}: invalid JSON ({e})") from e
        if not isinstance(payload, dict) or payload.get("schema_version") != SCENE_SCHEMA_VERSION:
            raise ValidationError(f"{self.scene_file}: unsupported scene schema_version (expected 1)")
        return payload

    def save_document(self, payload: dict[str, Any]) -> None:
        self.ensure_directories()
        try:
            with open(self.scene_file, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, ensure_ascii=False)
                f.write("\n")
        except OSError as e:
            raise IoFailure(f"cannot write {self.scene_file}: {e}") from e


def scene_document(scene: Scene) -> dict[str, Any]:
    """JSON echo of a scene (pure function)."""
    return {
        "schema_version": SCENE_SCHEMA_VERSION,
        "seed": scene.spec.seed,
        "frames": scene.frames,
        "spec": scene.spec.to_dict(),
        "placements": [
            {"width": p.width, "height": p.height, "centers": [list(c) for c in p.centers]}
            for p in scene.placements
        ],
    }


def save_scene(scene: Scene, directory: Path | str) -> SceneDirectory:
    """Write every frame of ``scene`` and its scene.json into ``directory``."""
    layout = SceneDirectory(directory)
    layout.ensure_directories()
    num_sprites = len(scene.spec.sprites)
    for t in range(scene.frames):
        write_ppm(scene.images[t], layout.frame_path(t))
        write_flo(scene.flows[t], layout.flow_path(t))
        write_pgm(scene.labels[t], layout.gt_path(t), num_labels=num_sprites)
        write_pgm(scene.foreground[t], layout.fg_path(t), num_labels=1)
    layout.save_document(scene_document(scene))
    logger.info("wrote %d frame(s) to %s", scene.frames, layout.base_dir)
    return layout


def load_scene(directory: Path | str) -> Scene:
    """Read a directory written by save_scene.

    Raises:
        IoFailure, ValidationError, FlowFormatError
    """
    layout = SceneDirectory(directory)
    payload = layout.load_document()
    try:
        spec = SceneSpec.from_dict(payload["spec"])
        placements = tuple(
            SpritePlacement(int(p["width"]), int(p["height"]), tuple(tuple(c) for c in p["centers"]))
            for p in payload.get("placements", [])
        )
        frames = int(payload["frames"])
    except (KeyError, TypeError, ValueError, ConfigError) as e:
        raise ValidationError(f"{layout.scene_file}: {e}") from e

    num_sprites = len(spec.sprites)
    return Scene(
        spec=spec,
        images=tuple(read_ppm(layout.frame_path(t)) for t in range(frames)),
        flows=tuple(read_flo(layout.flow_path(t)) for t in range(frames)),
        labels=tuple(read_pgm(layout.gt_path(t), num_labels=num_sprites) for t in range(frames)),
        foreground=tuple(read_pgm(layout.fg_path(t), num_labels=1) for t in range(frames)),
        placements=placements,
    )
