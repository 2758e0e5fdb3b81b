"""Parametric motion models, closed-form fitting and the segmentation energy."""

from gwm_segment.motion.energy import (
    EnergyReport,
    SoftMasks,
    dataset_risk,
    gradient_check,
    gwm_grad_logits,
    gwm_loss,
    softmax,
)
from gwm_segment.motion.models import (
    CoordNormalization,
    ModelFamily,
    MotionModelParams,
    lift,
    residual_map,
    synthesize_flow,
)
from gwm_segment.motion.solver import fit_wls, fit_wls_centered

__all__ = [
    "CoordNormalization",
    "EnergyReport",
    "ModelFamily",
    "MotionModelParams",
    "SoftMasks",
    "dataset_risk",
    "fit_wls",
    "fit_wls_centered",
    "gradient_check",
    "gwm_grad_logits",
    "gwm_loss",
    "lift",
    "residual_map",
    "softmax",
    "synthesize_flow",
]
