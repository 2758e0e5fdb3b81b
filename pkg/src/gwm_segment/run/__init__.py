"""Run configuration, manifests and output directories used by the CLI."""

from gwm_segment.run.config import DEFAULTS, load_config, merge_config, train_config
from gwm_segment.run.manifest import compute_manifest, git_describe, validate_manifest
from gwm_segment.run.storage import RunDirectory

__all__ = [
    "DEFAULTS",
    "RunDirectory",
    "compute_manifest",
    "git_describe",
    "load_config",
    "merge_config",
    "train_config",
    "validate_manifest",
]
