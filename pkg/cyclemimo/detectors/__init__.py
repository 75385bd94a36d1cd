from cyclemimo.detectors.ensemble import (
    DetectorEnsemble,
    build_ensemble,
    ensemble_from_bytes,
    ensemble_to_bytes,
    load_ensemble,
    save_ensemble,
)
from cyclemimo.detectors.lmmse import lmmse_detect
from cyclemimo.detectors.losses import d_loss, g_loss
from cyclemimo.detectors.preprocessing import (
    PreprocScales,
    augment,
    denormalize,
    fit_scales,
    flatten,
    normalize,
    unflatten,
)
from cyclemimo.detectors.session import BlockOutcome, DetectorSession
from cyclemimo.detectors.training import (
    PilotPairs,
    detect,
    pseudo_label,
    train_baseline,
    train_block,
    train_semisupervised,
    train_supervised,
)

__all__ = [
    "BlockOutcome",
    "DetectorEnsemble",
    "DetectorSession",
    "PilotPairs",
    "PreprocScales",
    "augment",
    "build_ensemble",
    "d_loss",
    "denormalize",
    "detect",
    "ensemble_from_bytes",
    "ensemble_to_bytes",
    "fit_scales",
    "flatten",
    "g_loss",
    "lmmse_detect",
    "load_ensemble",
    "normalize",
    "pseudo_label",
    "save_ensemble",
    "train_baseline",
    "train_block",
    "train_semisupervised",
    "train_supervised",
    "unflatten",
]
