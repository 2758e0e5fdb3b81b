"""Exceptions raised by the gwm_segment library (no external deps)."""

from __future__ import annotations


class GwmError(Exception):
    """Base class for every error raised by gwm_segment."""


# ------------------
# Configuration
# ------------------


class ConfigError(GwmError):
    """Raised when a configuration value or document is invalid."""


class UnknownPreset(ConfigError):
    """Raised when a scene preset name is not known."""


class ValidationError(GwmError):
    """Raised when a manifest or report payload structure is invalid."""


# ------------------
# Containers and I/O
# ------------------


class FlowFormatError(GwmError):
    """A flow or image container is malformed."""


class BadMagic(FlowFormatError):
    """The .flo magic number is not 202021.25."""


class TruncatedFile(FlowFormatError):
    """The file ends before the header or payload is complete."""


class DimensionOverflow(FlowFormatError):
    """Width or height outside 1..65535."""


class NonFiniteValue(GwmError):
    """A field contains NaN or Inf."""


class IoFailure(GwmError):
    """Reading or writing a file failed at the OS level."""


class DimensionMismatch(GwmError):
    """Two inputs that must share a lattice do not."""


# ------------------
# Numerics
# ------------------


class NumericError(GwmError):
    """Base class for numerical failures."""


class ZeroWeight(NumericError):
    """The weights of a fit sum to zero."""


class SingularSystem(NumericError):
    """The moment matrix cannot be solved, even with the ridge term."""


class NonFiniteLogit(NumericError):
    """Logits contain NaN or Inf."""


class DivergedLoss(NumericError):
    """Training produced a non-finite loss (learning rate too large)."""


class EigenFailure(NumericError):
    """The eigen-decomposition of the graph Laplacian failed."""


# ------------------
# Pipeline
# ------------------


class EmptyDataset(GwmError):
    """A dataset-level operation received no frames."""


class ModeMismatch(GwmError):
    """A per-pixel segmenter was asked to predict on a frame it was not trained on."""


class AllDegenerate(GwmError):
    """Fewer than two segments carry enough mass to define an affinity."""


class KTooLarge(GwmError):
    """Exhaustive component assignment requested for more than 16 components."""


class SpriteOutOfBounds(GwmError):
    """A sprite leaves the frame during the sequence."""
