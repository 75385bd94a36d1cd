"""
Per-block training of the neural detectors.

The pilot phase fits one candidate on the current pilots and, when the previous block's pilots are
available, a second candidate from the same starting weights on both pilot sets; the candidate with
the lower validation BER wins. The payload phase keeps training on the pilots plus pseudo-labeled
payload rows and refreshes the pseudo labels every time validation BER strictly improves.
"""

import copy
from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np

from cyclemimo.constants import MIN_PILOTS, VALIDATION_SHARE
from cyclemimo.detectors.ensemble import NETWORK_NAMES, DetectorEnsemble
from cyclemimo.detectors.losses import discriminator_pass, generator_pass
from cyclemimo.detectors.preprocessing import (
    augment,
    denormalize,
    fit_scales,
    flatten,
    hard_bits_from_rows,
    normalize,
    unflatten,
)
from cyclemimo.exceptions import DomainError, InsufficientDataError, TrainingStateError
from cyclemimo.link import ComplexFrame, qpsk_hard_bits
from cyclemimo.logging import format_log_preview, get_logger
from cyclemimo.models import DetectorKind, LossWeights, TrainReport
from cyclemimo.nn import AdamState, adam_step

if TYPE_CHECKING:
    from cyclemimo.config import TrainingConfig

logger = get_logger(__name__)

StopReason = Literal["patience", "epoch_cap"]

_SEED_BOUND = 2**63


@dataclass(frozen=True)
class PilotPairs:
    s: ComplexFrame  # [streams x P]
    y: ComplexFrame  # [N_r x P]

    @property
    def count(self) -> int:
        return self.s.shape[1]


@dataclass
class PairedSet:
    s: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return self.s.shape[0]


@dataclass
class EarlyStopping:
    """Running minimum of validation BER with a patience counter; ties are not progress."""

    patience: int
    best: float
    stale_epochs: int = 0

    def update(self, value: float) -> bool:
        if value < self.best:
            self.best = value
            self.stale_epochs = 0
            return True
        self.stale_epochs += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.stale_epochs >= self.patience


@dataclass(frozen=True)
class FitResult:
    epochs_run: int
    best_val_ber: float
    stopped_by: StopReason


def adam_template(cfg: "TrainingConfig") -> AdamState:
    return AdamState(
        learning_rate=cfg.learning_rate,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        epsilon=cfg.epsilon,
        l2_coeff=cfg.l2_coeff,
    )


def validation_ber(ensemble: DetectorEnsemble, val_s: np.ndarray, val_y: np.ndarray) -> float:
    """Hard-decision BER of G_y2s on normalized validation pairs, decided after denormalization."""
    if ensemble.scales is None:
        raise TrainingStateError("Validation requires fitted normalization scales")
    estimate = denormalize(ensemble.g_y2s.forward(val_y, "eval"), ensemble.scales.s_scale)
    decided = hard_bits_from_rows(estimate)
    truth = hard_bits_from_rows(val_s)
    return float(np.mean(decided != truth))


def _snapshot(ensemble: DetectorEnsemble) -> dict[str, object]:
    state: dict[str, object] = {name: getattr(ensemble, name) for name in NETWORK_NAMES}
    state["optimizers"] = ensemble.optimizers
    return copy.deepcopy(state)


def _restore(ensemble: DetectorEnsemble, snapshot: dict[str, object]) -> None:
    for name, value in copy.deepcopy(snapshot).items():
        setattr(ensemble, name, value)


def _run_epoch(
    ensemble: DetectorEnsemble,
    data: PairedSet,
    weights: LossWeights,
    kind: DetectorKind,
    cfg: "TrainingConfig",
    rng: np.random.Generator,
) -> None:
    template = adam_template(cfg)
    order = rng.permutation(len(data))
    for start in range(0, len(data), cfg.batch_size):
        batch = order[start : start + cfg.batch_size]
        s, y = data.s[batch], data.y[batch]

        if kind.adversarial:
            inverted = bool(rng.random() < cfg.label_invert_prob)
            fake_y = ensemble.g_s2y.forward(s, "eval")
            fake_s = ensemble.g_y2s.forward(y, "eval")
            discriminator_pass(ensemble.d_s2y, s, y, fake_y, inverted)
            discriminator_pass(ensemble.d_y2s, y, s, fake_s, inverted)
            adam_step(ensemble.d_s2y, ensemble.optimizer("d_s2y", template))
            adam_step(ensemble.d_y2s, ensemble.optimizer("d_y2s", template))

        generator_pass(ensemble, s, y, weights, adversarial=kind.adversarial, backprop=True)
        adam_step(ensemble.g_y2s, ensemble.optimizer("g_y2s", template))
        if kind.trains_forward_generator:
            adam_step(ensemble.g_s2y, ensemble.optimizer("g_s2y", template))
        else:
            ensemble.g_s2y.zero_grad()


def fit(
    ensemble: DetectorEnsemble,
    data: PairedSet,
    val_s: np.ndarray,
    val_y: np.ndarray,
    weights: LossWeights,
    kind: DetectorKind,
    cfg: "TrainingConfig",
    rng: np.random.Generator,
    on_improve: Callable[[], None] | None = None,
    epoch_cap: int | None = None,
) -> FitResult:
    """
    Epoch loop with early stopping on validation BER. The ensemble ends in its best-validation
    state; `on_improve` runs after every strict improvement and may replace the contents of `data`.
    `epoch_cap` narrows `cfg.epoch_cap` when part of the block's budget is already spent.
    """
    limit = cfg.epoch_cap if epoch_cap is None else min(epoch_cap, cfg.epoch_cap)
    ensemble.reseed(rng)
    stopper = EarlyStopping(cfg.patience, validation_ber(ensemble, val_s, val_y))
    best = _snapshot(ensemble)
    epochs = 0
    stopped_by: StopReason = "epoch_cap"

    while epochs < limit:
        _run_epoch(ensemble, data, weights, kind, cfg, rng)
        epochs += 1
        val_ber = validation_ber(ensemble, val_s, val_y)
        if stopper.update(val_ber):
            best = _snapshot(ensemble)
            logger.debug("Validation improved", detector=str(kind), epoch=epochs, val_ber=val_ber)
            if on_improve is not None:
                on_improve()
        elif stopper.should_stop:
            stopped_by = "patience"
            break

    _restore(ensemble, best)
    ensemble.best_val_ber = stopper.best
    if stopped_by == "epoch_cap":
        logger.warning("Training hit the epoch cap", detector=str(kind), epochs=epochs, val_ber=stopper.best)
    return FitResult(epochs_run=epochs, best_val_ber=stopper.best, stopped_by=stopped_by)


def _split(count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    order = rng.permutation(count)
    n_val = count // VALIDATION_SHARE
    return order[n_val:], order[:n_val]


def train_supervised(
    ensemble: DetectorEnsemble,
    current: PilotPairs,
    previous: PilotPairs | None,
    cfg: "TrainingConfig",
    rng: np.random.Generator,
    *,
    kind: DetectorKind = DetectorKind.CYCLEGAN,
    received: ComplexFrame | None = None,
) -> TrainReport:
    """
    Pilot-phase training. `received` is the payload part of the block; it only widens the
    received-domain normalization so that payload rows later stay inside [-1, 1].
    """
    if current.count < MIN_PILOTS:
        logger.error("Too few pilots for a train/validation split", pilots=current.count, minimum=MIN_PILOTS)
        raise InsufficientDataError(f"Need at least {MIN_PILOTS} pilot pairs, got {current.count}")

    s_flat, y_flat = flatten(current.s), flatten(current.y)
    s_fit, y_fit = [s_flat], [y_flat]
    if received is not None and received.shape[1]:
        y_fit.append(flatten(received))
    if previous is not None:
        s_fit.append(flatten(previous.s))
        y_fit.append(flatten(previous.y))
    ensemble.scales = fit_scales(np.vstack(s_fit), np.vstack(y_fit), shared=cfg.shared_scaling)
    s_scale, y_scale = ensemble.scales.s_scale, ensemble.scales.y_scale
    logger.debug(
        "Fitted normalization scales",
        detector=str(kind),
        s_scale=format_log_preview(s_scale),
        y_scale=format_log_preview(y_scale),
    )

    s_norm, y_norm = normalize(s_flat, s_scale), normalize(y_flat, y_scale)
    train_idx, val_idx = _split(current.count, rng)
    train_s, train_y = augment(
        s_norm[train_idx], y_norm[train_idx], cfg.pilot_augment_factor, cfg.augment_noise_std, rng
    )
    val_s, val_y = augment(s_norm[val_idx], y_norm[val_idx], cfg.pilot_augment_factor, cfg.augment_noise_std, rng)

    weights = ensemble.pilot_weights.for_detector(kind)
    fit_seed = int(rng.integers(_SEED_BOUND))

    candidate = ensemble.clone()
    current_set = PairedSet(train_s, train_y)
    result = fit(candidate, current_set, val_s, val_y, weights, kind, cfg, np.random.default_rng(fit_seed))
    winner, winner_s, winner_y = candidate, train_s, train_y
    used_previous = False

    if previous is not None and previous.count:
        prev_s, prev_y = augment(
            normalize(flatten(previous.s), s_scale),
            normalize(flatten(previous.y), y_scale),
            cfg.pilot_augment_factor,
            cfg.augment_noise_std,
            rng,
        )
        extended_s, extended_y = np.vstack([train_s, prev_s]), np.vstack([train_y, prev_y])
        extended = ensemble.clone()
        extended_result = fit(
            extended,
            PairedSet(extended_s, extended_y),
            val_s,
            val_y,
            weights,
            kind,
            cfg,
            np.random.default_rng(fit_seed),
        )
        logger.debug(
            "Compared pilot candidates",
            detector=str(kind),
            current_val_ber=result.best_val_ber,
            extended_val_ber=extended_result.best_val_ber,
        )
        if extended_result.best_val_ber < result.best_val_ber:
            winner, winner_s, winner_y = extended, extended_s, extended_y
            result = extended_result
            used_previous = True

    ensemble.adopt(winner)
    ensemble.train_s, ensemble.train_y = winner_s, winner_y
    ensemble.val_s, ensemble.val_y = val_s, val_y
    ensemble.pseudo_labels = None
    return TrainReport(
        epochs_run=result.epochs_run,
        best_val_ber=result.best_val_ber,
        stopped_by=result.stopped_by,
        used_previous_pilots=used_previous,
    )


def pseudo_label(ensemble: DetectorEnsemble, y_payload: ComplexFrame) -> np.ndarray:
    """Normalized estimate of the payload rows, kept in the normalized domain for reuse as targets."""
    if ensemble.scales is None:
        raise TrainingStateError("Pseudo labeling requires fitted normalization scales")
    rows = normalize(flatten(y_payload), ensemble.scales.y_scale)
    return ensemble.g_y2s.forward(rows, "eval")


def train_semisupervised(
    ensemble: DetectorEnsemble,
    y_payload: ComplexFrame,
    cfg: "TrainingConfig",
    rng: np.random.Generator,
    *,
    kind: DetectorKind = DetectorKind.CYCLEGAN,
    epoch_budget: int | None = None,
) -> TrainReport:
    """Payload-phase training; `epoch_budget` is what the block has left of the epoch cap."""
    if ensemble.val_s is None or ensemble.val_y is None or ensemble.train_s is None or ensemble.train_y is None:
        logger.error("Payload-phase training started before pilot-phase training", detector=str(kind))
        raise TrainingStateError("Semi-supervised training needs a pilot training and validation set")
    if ensemble.scales is None:
        raise TrainingStateError("Semi-supervised training needs fitted normalization scales")

    pilot_s, pilot_y = ensemble.train_s, ensemble.train_y
    payload_rows = normalize(flatten(y_payload), ensemble.scales.y_scale)
    has_payload = payload_rows.shape[0] > 0
    if not has_payload:
        logger.warning("Empty payload, continuing with pilots only", detector=str(kind))

    augment_seed = int(rng.integers(_SEED_BOUND))
    data = PairedSet(pilot_s, pilot_y)
    refreshes = 0

    def rebuild() -> None:
        labels = ensemble.g_y2s.forward(payload_rows, "eval")
        ensemble.pseudo_labels = labels
        payload_s, payload_y = augment(
            labels,
            payload_rows,
            cfg.payload_augment_factor,
            cfg.augment_noise_std,
            np.random.default_rng(augment_seed),
        )
        data.s = np.vstack([pilot_s, payload_s])
        data.y = np.vstack([pilot_y, payload_y])

    def on_improve() -> None:
        nonlocal refreshes
        if has_payload:
            rebuild()
            refreshes += 1
            logger.debug("Refreshed pseudo labels", detector=str(kind), refreshes=refreshes)

    if has_payload:
        rebuild()

    weights = ensemble.data_weights.for_detector(kind)
    fit_rng = np.random.default_rng(int(rng.integers(_SEED_BOUND)))
    result = fit(
        ensemble,
        data,
        ensemble.val_s,
        ensemble.val_y,
        weights,
        kind,
        cfg,
        fit_rng,
        on_improve=on_improve,
        epoch_cap=epoch_budget,
    )
    if has_payload:
        ensemble.pseudo_labels = pseudo_label(ensemble, y_payload)
    return TrainReport(
        epochs_run=result.epochs_run,
        best_val_ber=result.best_val_ber,
        stopped_by=result.stopped_by,
        pseudo_label_refreshes=refreshes,
    )


def detect(ensemble: DetectorEnsemble, y_payload: ComplexFrame) -> tuple[ComplexFrame, np.ndarray]:
    if ensemble.scales is None:
        raise TrainingStateError("Detection requires a trained ensemble")
    rows = normalize(flatten(y_payload), ensemble.scales.y_scale)
    estimate = unflatten(denormalize(ensemble.g_y2s.forward(rows, "eval"), ensemble.scales.s_scale))
    return estimate, qpsk_hard_bits(estimate)


def merge_reports(pilot_phase: TrainReport, payload_phase: TrainReport | None) -> TrainReport:
    """One report per block: epochs of both phases add up, the payload phase decides the final state."""
    if payload_phase is None:
        return pilot_phase
    return TrainReport(
        epochs_run=pilot_phase.epochs_run + payload_phase.epochs_run,
        best_val_ber=payload_phase.best_val_ber,
        stopped_by=payload_phase.stopped_by,
        used_previous_pilots=pilot_phase.used_previous_pilots,
        pseudo_label_refreshes=payload_phase.pseudo_label_refreshes,
    )


def train_block(
    kind: DetectorKind,
    ensemble: DetectorEnsemble,
    current: PilotPairs,
    previous: PilotPairs | None,
    y_payload: ComplexFrame,
    cfg: "TrainingConfig",
    rng: np.random.Generator,
) -> TrainReport:
    """
    Pilot phase, then the payload phase for the semi-supervised detectors. Both phases share
    one budget of `cfg.epoch_cap` epochs per block.
    """
    if not kind.is_neural:
        raise DomainError(f"Detector '{kind}' has no trainable networks")
    pilot_report = train_supervised(ensemble, current, previous, cfg, rng, kind=kind, received=y_payload)
    payload_report = None
    if kind.semi_supervised:
        remaining = cfg.epoch_cap - pilot_report.epochs_run
        if remaining > 0:
            payload_report = train_semisupervised(ensemble, y_payload, cfg, rng, kind=kind, epoch_budget=remaining)
        else:
            logger.warning("Pilot phase used the whole epoch budget, skipping the payload phase", detector=str(kind))
    return merge_reports(pilot_report, payload_report)


def train_baseline(
    kind: DetectorKind,
    ensemble: DetectorEnsemble,
    current: PilotPairs,
    previous: PilotPairs | None,
    y_payload: ComplexFrame,
    cfg: "TrainingConfig",
    rng: np.random.Generator,
) -> TrainReport:
    if kind.adversarial or not kind.is_neural:
        raise DomainError(f"'{kind}' is not a non-adversarial baseline detector")
    return train_block(kind, ensemble, current, previous, y_payload, cfg, rng)
