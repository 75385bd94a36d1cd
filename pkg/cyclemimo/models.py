from enum import StrEnum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from cyclemimo.constants import DEFAULT_LOSS_WEIGHT


class DetectorKind(StrEnum):
    LMMSE = "lmmse"
    DNN = "dnn"
    CYCLEDNN = "cyclednn"
    CYCLEDNN_SUP = "cyclednn-sup"
    CYCLEGAN = "cyclegan"
    CYCLEGAN_SUP = "cyclegan-sup"

    @property
    def is_neural(self) -> bool:
        return self is not DetectorKind.LMMSE

    @property
    def adversarial(self) -> bool:
        return self in (DetectorKind.CYCLEGAN, DetectorKind.CYCLEGAN_SUP)

    @property
    def semi_supervised(self) -> bool:
        return self in (DetectorKind.CYCLEGAN, DetectorKind.CYCLEDNN)

    @property
    def trains_forward_generator(self) -> bool:
        return self is not DetectorKind.DNN


class LossWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(DEFAULT_LOSS_WEIGHT, ge=0, description="Weight of |G_s2y(s) - y|_1.")
    beta: float = Field(DEFAULT_LOSS_WEIGHT, ge=0, description="Weight of |G_y2s(y) - s|_1.")
    gamma: float = Field(DEFAULT_LOSS_WEIGHT, ge=0, description="Weight of |G_y2s(G_s2y(s)) - s|_1.")
    delta: float = Field(DEFAULT_LOSS_WEIGHT, ge=0, description="Weight of |G_s2y(G_y2s(y)) - y|_1.")

    def for_detector(self, kind: DetectorKind) -> "LossWeights":
        """The DNN baseline keeps only the detection term."""
        if kind is DetectorKind.DNN:
            return LossWeights(alpha=0.0, beta=self.beta, gamma=0.0, delta=0.0)
        return self


class TrainReport(BaseModel):
    epochs_run: int = Field(ge=0)
    best_val_ber: float = Field(ge=0, le=1)
    stopped_by: Literal["patience", "epoch_cap"]
    used_previous_pilots: bool = False
    pseudo_label_refreshes: int = Field(0, ge=0)


class MetricsRecord(BaseModel):
    ebn0_db: float
    block_index: int = Field(ge=0)
    detector: DetectorKind
    ber: float = Field(ge=0, le=1)
    achievable_rate_bits_per_use: float = Field(ge=0)
    epochs_run: int = Field(ge=0)
    used_previous_pilots: bool
    pseudo_label_refreshes: int = Field(ge=0)
    wallclock_s: float = Field(ge=0)
    seed: int


class CurvePoint(BaseModel):
    ebn0_db: float
    detector: DetectorKind
    mean_ber: float
    mean_rate: float


class RunStats(BaseModel):
    points: int
    blocks: int
    records: int
