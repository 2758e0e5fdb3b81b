"""Run manifest (manifest.json, schema v1).

The manifest carries no wall-clock timestamp so that re-running a command
reproduces its output tree byte for byte. See docs/specs/manifest_v1.md.
"""

from __future__ import annotations

import logging
import math
import subprocess
from pathlib import Path
from typing import Any, Iterable, TypedDict

from gwm_segment.errors import ValidationError

logger = logging.getLogger(__name__)

MANIFEST_SCHEMA_VERSION = 1
MERGE_METHODS = ("identity", "spectral", "fallback", "mixed")
UNKNOWN_REVISION = "unknown"

# keys that name the output location and are left out of the config echo
OUTPUT_KEYS = ("out",)

# ------------------
# Type Definitions
# ------------------


class RunInfo(TypedDict, total=False):
    command: str
    tool_version: str
    git_describe: str


class TrainSummary(TypedDict, total=False):
    mode: str
    frames: int
    iterations: int
    initial_loss: float
    final_loss: float


class ManifestPayload(TypedDict, total=False):
    schema_version: int
    run: RunInfo
    config: dict[str, Any]
    train_config: dict[str, Any]
    result: TrainSummary
    merge: str
    merge_methods: list[str]
    outputs: list[str]


def git_describe(cwd: Path | str | None = None) -> str:
    """``git describe --always --dirty --tags`` run in ``cwd``, or "unknown".

    Defaults to the working directory, never the installed package location.
    """
    cwd = Path(cwd) if cwd else Path.cwd()
    try:
        out = subprocess.check_output(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=cwd,
            stderr=subprocess.DEVNULL,
        )
    except (OSError, subprocess.CalledProcessError):
        logger.debug("git describe unavailable in %s", cwd)
        return UNKNOWN_REVISION
    return out.decode("utf-8").strip() or UNKNOWN_REVISION


def summarize_merge(methods: Iterable[str]) -> str:
    """Single method when every frame used the same one, else "mixed"."""
    distinct = sorted(set(methods))
    return distinct[0] if len(distinct) == 1 else "mixed"


def compute_manifest(
    config: dict[str, Any],
    *,
    command: str,
    tool_version: str,
    revision: str,
    train_config: dict[str, Any],
    result: TrainSummary,
    merge_methods: list[str],
    outputs: Iterable[str],
) -> ManifestPayload:
    """Build manifest.json content.

    Pure function: the revision string is passed in, no I/O.
    """
    return {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "run": {"command": command, "tool_version": tool_version, "git_describe": revision},
        "config": {k: v for k, v in sorted(config.items()) if k not in OUTPUT_KEYS},
        "train_config": train_config,
        "result": result,
        "merge": summarize_merge(merge_methods),
        "merge_methods": list(merge_methods),
        "outputs": sorted(outputs),
    }


# ------------------
# Validation Helpers (lightweight)
# ------------------


def _finite(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def validate_manifest(meta: ManifestPayload) -> None:
    if meta.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ValidationError("Unsupported schema_version (expected 1).")
    run = meta.get("run") or {}
    for key in ("command", "tool_version", "git_describe"):
        if not isinstance(run.get(key), str) or not run.get(key):
            raise ValidationError(f"run.{key} must be a non-empty string.")
    if not isinstance(meta.get("config"), dict):
        raise ValidationError("'config' must be an object.")
    if not isinstance(meta.get("train_config"), dict):
        raise ValidationError("'train_config' must be an object.")
    result = meta.get("result") or {}
    for key in ("initial_loss", "final_loss"):
        if not _finite(result.get(key)):
            raise ValidationError(f"result.{key} must be a finite number.")
    for key in ("frames", "iterations"):
        if not isinstance(result.get(key), int) or result[key] < 1:
            raise ValidationError(f"result.{key} must be a positive integer.")
    if meta.get("merge") not in MERGE_METHODS:
        raise ValidationError(f"merge must be one of {MERGE_METHODS}.")
    methods = meta.get("merge_methods")
    if not isinstance(methods, list) or any(m not in MERGE_METHODS[:3] for m in methods):
        raise ValidationError("'merge_methods' must list a method per frame.")
    if not isinstance(meta.get("outputs"), list):
        raise ValidationError("'outputs' must be a list.")
