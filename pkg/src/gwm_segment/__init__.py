from .merge.merging import merge_masks
from .motion.energy import dataset_risk, gwm_grad_logits, gwm_loss
from .motion.solver import fit_wls
from .scenes.generator import generate
from .scenes.presets import preset
from .segment.training import TrainConfig, train_internal

__version__ = "0.1.0"

__all__ = [
    "TrainConfig",
    "dataset_risk",
    "fit_wls",
    "generate",
    "gwm_grad_logits",
    "gwm_loss",
    "merge_masks",
    "preset",
    "train_internal",
    "__version__",
]
