"""Per-command run configuration.

A command's configuration is built from three layers, later layers winning:
the DEFAULTS table, an optional JSON document given with ``--config``, and
flags given on the command line. Unknown keys in the JSON document are
rejected, and every default is materialized before the config is echoed.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, TypedDict

from gwm_segment.errors import ConfigError, IoFailure
from gwm_segment.motion.models import ModelFamily
from gwm_segment.scenes.presets import PRESETS
from gwm_segment.segment.features import FeatureSpec
from gwm_segment.segment.training import InitKind, Mode, TrainConfig

# ------------------
# Type Definitions
# ------------------


class GenConfig(TypedDict, total=False):
    preset: str
    seed: int
    out: str | None
    verify: bool


class SegmentConfig(TypedDict, total=False):
    scene: str | None
    out: str | None
    mode: str
    k: int
    family: str
    iters: int
    lr: float | None
    momentum: float
    seed: int
    init: str
    init_scale: float | None
    restarts: int
    ridge: float | None
    weight_floor: float | None
    fourier_pairs: int
    fourier_scale: float
    epsilon: float
    predict_scene: str | None


class MergeConfig(TypedDict, total=False):
    masks: str | None
    scene: str | None
    out: str | None
    epsilon: float


class EvalConfig(TypedDict, total=False):
    pred: str | None
    scene: str | None
    masks: str | None
    mode: str
    out: str | None


class VizConfig(TypedDict, total=False):
    scene: str | None
    masks: str | None
    out: str | None
    max_magnitude: float | str


DEFAULTS: dict[str, dict[str, Any]] = {
    "gen": GenConfig(preset="smoke", seed=0, out=None, verify=False),
    "segment": SegmentConfig(
        scene=None,
        out=None,
        mode=Mode.PERPIXEL.value,
        k=4,
        family=ModelFamily.QUADRATIC12.value,
        iters=300,
        lr=None,
        momentum=0.9,
        seed=0,
        init=InitKind.SMOOTH.value,
        init_scale=None,
        restarts=4,
        ridge=None,
        weight_floor=None,
        fourier_pairs=0,
        fourier_scale=3.0,
        epsilon=1e-12,
        predict_scene=None,
    ),
    "merge": MergeConfig(masks=None, scene=None, out=None, epsilon=1e-12),
    "eval": EvalConfig(pred=None, scene=None, masks=None, mode="heuristic", out=None),
    "viz": VizConfig(scene=None, masks=None, out=None, max_magnitude="auto"),
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "gen": ("out",),
    "segment": ("scene", "out"),
    "merge": ("masks", "scene", "out"),
    "eval": ("pred", "scene"),
    "viz": ("scene", "out"),
}

EVAL_MODES = ("heuristic", "oracle")


# ------------------
# Loading and merging
# ------------------


def load_config_file(path: Path | str) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as e:
        raise IoFailure(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return payload


def merge_config(
    command: str,
    file_values: Mapping[str, Any] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    """Defaults, then file values, then non-None overrides.

    Pure function: no I/O.

    Raises:
        ConfigError: unknown command or unknown keys.
    """
    try:
        config = dict(DEFAULTS[command])
    except KeyError:
        raise ConfigError(f"unknown command {command!r}") from None
    for source, values in (("config file", file_values or {}), ("overrides", overrides or {})):
        unknown = sorted(set(values) - set(config))
        if unknown:
            raise ConfigError(f"unknown {command} key(s) in {source}: {', '.join(unknown)}")
        for key, value in values.items():
            if source == "overrides" and value is None:
                continue
            config[key] = value
    validate_config(command, config)
    return config


def load_config(
    command: str, path: Path | str | None = None, overrides: Mapping[str, Any] | None = None
) -> dict[str, Any]:
    file_values = load_config_file(path) if path else None
    return merge_config(command, file_values, overrides)


# ------------------
# Validation Helpers (lightweight)
# ------------------


def _require_int(config: Mapping[str, Any], key: str, minimum: int) -> None:
    value = config[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {value!r}")


def _require_number(config: Mapping[str, Any], key: str, optional: bool = False) -> None:
    value = config[key]
    if value is None and optional:
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")


def validate_config(command: str, config: Mapping[str, Any]) -> None:
    missing = [key for key in REQUIRED[command] if not config.get(key)]
    if missing:
        raise ConfigError(f"{command} needs: {', '.join(missing)}")
    if command == "gen":
        if config["preset"] not in PRESETS:
            raise ConfigError(
                f"unknown preset {config['preset']!r} (expected one of: {', '.join(PRESETS)})"
            )
        _require_int(config, "seed", 0)
    elif command == "segment":
        Mode.parse(config["mode"])
        ModelFamily.parse(config["family"])
        _require_int(config, "k", 2)
        _require_int(config, "iters", 1)
        _require_int(config, "seed", 0)
        InitKind.parse(config["init"])
        _require_int(config, "restarts", 1)
        _require_int(config, "fourier_pairs", 0)
        for key in ("momentum", "fourier_scale", "epsilon"):
            _require_number(config, key)
        for key in ("lr", "init_scale", "ridge", "weight_floor"):
            _require_number(config, key, optional=True)
    elif command == "merge":
        _require_number(config, "epsilon")
    elif command == "eval":
        if config["mode"] not in EVAL_MODES:
            raise ConfigError(f"eval mode must be one of {EVAL_MODES}, got {config['mode']!r}")
    elif command == "viz":
        value = config["max_magnitude"]
        if value != "auto":
            _require_number(config, "max_magnitude")


def train_config(config: Mapping[str, Any]) -> TrainConfig:
    """TrainConfig described by a merged segment config."""
    return TrainConfig(
        family=ModelFamily.parse(config["family"]),
        K=config["k"],
        iterations=config["iters"],
        learning_rate=config["lr"],
        momentum=config["momentum"],
        seed=config["seed"],
        init=InitKind.parse(config["init"]),
        init_scale=config["init_scale"],
        restarts=config["restarts"],
        ridge=config["ridge"],
        weight_floor=config["weight_floor"],
        feature_spec=FeatureSpec(
            fourier_pairs=config["fourier_pairs"],
            fourier_scale=config["fourier_scale"],
            seed=config["seed"],
        ),
    )
