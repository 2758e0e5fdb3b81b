"""Run output directory.

    <out>/components_0000.pgm   argmax component of every pixel, gray round(k * 255 / (K - 1))
    <out>/masks_0000.npy        soft masks, float64 (H, W, K)
    <out>/pred_0000.pgm         merged binary foreground, 0/255
    <out>/loss_trace.csv        iteration,loss
    <out>/segmenter.json        trained linear segmenter (linear mode)
    <out>/merge.json            per-frame merge method and colouring
    <out>/manifest.json         run manifest
    <out>/heldout/              the same per-frame files for a held-out scene
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from gwm_segment.errors import IoFailure, ValidationError
from gwm_segment.flowfield.containers import LabelMap
from gwm_segment.flowfield.io import read_pgm, write_pgm
from gwm_segment.motion.energy import SoftMasks

_FRAME_KINDS = {
    "components": re.compile(r"^components_(\d{4})\.pgm$"),
    "masks": re.compile(r"^masks_(\d{4})\.npy$"),
    "pred": re.compile(r"^pred_(\d{4})\.pgm$"),
}


class RunDirectory:
    """Paths and persistence for one command's output directory.

    Every file written through the directory (or a subdirectory) is recorded
    relative to the top-level directory; ``written_outputs`` lists them.
    """

    def __init__(self, base_dir: Path | str, root: Path | None = None, record: set[str] | None = None):
        self.base_dir = Path(base_dir)
        self.root = root or self.base_dir
        self._written = set() if record is None else record
        self.manifest_file = self.base_dir / "manifest.json"
        self.loss_trace_file = self.base_dir / "loss_trace.csv"
        self.segmenter_file = self.base_dir / "segmenter.json"
        self.merge_file = self.base_dir / "merge.json"
        self.report_file = self.base_dir / "report.json"

    def ensure_directories(self) -> None:
        try:
            self.base_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise IoFailure(f"cannot create {self.base_dir}: {e}") from e

    def subdirectory(self, name: str) -> RunDirectory:
        return RunDirectory(self.base_dir / name, root=self.root, record=self._written)

    def components_path(self, t: int) -> Path:
        return self.base_dir / f"components_{t:04d}.pgm"

    def masks_path(self, t: int) -> Path:
        return self.base_dir / f"masks_{t:04d}.npy"

    def pred_path(self, t: int) -> Path:
        return self.base_dir / f"pred_{t:04d}.pgm"

    def track(self, path: Path) -> Path:
        """Record ``path`` as an output of this run."""
        self._written.add(path.relative_to(self.root).as_posix())
        return path

    def written_outputs(self, exclude: Sequence[Path] = ()) -> list[str]:
        """Sorted relative paths of the files written so far."""
        skipped = {p.relative_to(self.root).as_posix() for p in exclude}
        return sorted(self._written - skipped)

    def remove(self, path: Path) -> None:
        try:
            path.unlink(missing_ok=True)
        except OSError as e:
            raise IoFailure(f"cannot remove {path}: {e}") from e
        self._written.discard(path.relative_to(self.root).as_posix())

    def prune_frames(self, keep: int, kinds: Sequence[str] = tuple(_FRAME_KINDS)) -> None:
        """Delete per-frame files of the given kinds numbered ``keep`` or higher."""
        if not self.base_dir.is_dir():
            return
        patterns = [_FRAME_KINDS[kind] for kind in kinds]
        for path in sorted(self.base_dir.iterdir()):
            for pattern in patterns:
                m = pattern.match(path.name)
                if m and int(m.group(1)) >= keep:
                    self.remove(path)

    def _frame_indices(self, pattern: re.Pattern) -> list[int]:
        if not self.base_dir.is_dir():
            raise IoFailure(f"{self.base_dir} is not a directory")
        indices = sorted(int(m.group(1)) for p in self.base_dir.iterdir() if (m := pattern.match(p.name)))
        if indices != list(range(len(indices))):
            raise ValidationError(f"{self.base_dir}: frame files are not numbered 0..T-1")
        return indices

    # ------------------
    # Per-frame files
    # ------------------

    def save_frame(self, t: int, masks: SoftMasks, foreground: LabelMap | None = None) -> None:
        """Write the components PGM, the soft-mask dump and (optionally) the prediction."""
        write_pgm(masks.argmax(), self.track(self.components_path(t)), num_labels=masks.K - 1)
        try:
            np.save(self.track(self.masks_path(t)), masks.probs, allow_pickle=False)
        except OSError as e:
            raise IoFailure(f"cannot write {self.masks_path(t)}: {e}") from e
        if foreground is not None:
            self.save_prediction(t, foreground)

    def save_prediction(self, t: int, foreground: LabelMap) -> None:
        write_pgm(foreground, self.track(self.pred_path(t)), num_labels=1)

    def load_masks(self) -> list[SoftMasks]:
        """Every masks_%04d.npy in frame order.

        Raises:
            IoFailure: the directory is missing or holds no masks.
        """
        indices = self._frame_indices(_FRAME_KINDS["masks"])
        if not indices:
            raise IoFailure(f"no masks_*.npy files in {self.base_dir}")
        masks = []
        for t in indices:
            try:
                probs = np.load(self.masks_path(t), allow_pickle=False)
            except (OSError, ValueError) as e:
                raise IoFailure(f"cannot read {self.masks_path(t)}: {e}") from e
            masks.append(SoftMasks(probs))
        return masks

    def load_predictions(self) -> list[LabelMap]:
        indices = self._frame_indices(_FRAME_KINDS["pred"])
        if not indices:
            raise IoFailure(f"no pred_*.pgm files in {self.base_dir}")
        return [read_pgm(self.pred_path(t), num_labels=1) for t in indices]

    # ------------------
    # Documents
    # ------------------

    def write_json(self, path: Path, payload: dict[str, Any]) -> None:
        self.ensure_directories()
        try:
            with open(self.track(path), "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, ensure_ascii=False)
                f.write("\n")
        except OSError as e:
            raise IoFailure(f"cannot write {path}: {e}") from e

    def write_loss_trace(self, trace: Sequence[float]) -> None:
        """One ``iteration,loss`` row per step, losses as shortest round-trip decimals."""
        try:
            with open(self.track(self.loss_trace_file), "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(["iteration", "loss"])
                for i, loss in enumerate(trace):
                    writer.writerow([i, repr(float(loss))])
        except OSError as e:
            raise IoFailure(f"cannot write {self.loss_trace_file}: {e}") from e

    def read_loss_trace(self) -> list[float]:
        try:
            with open(self.loss_trace_file, "r", encoding="utf-8", newline="") as f:
                rows = list(csv.DictReader(f))
        except OSError as e:
            raise IoFailure(f"cannot read {self.loss_trace_file}: {e}") from e
        return [float(row["loss"]) for row in rows]
