class CycleMimoError(Exception):
    pass


class ConfigError(CycleMimoError):
    pass


class ShapeError(CycleMimoError):
    pass


class NumericError(CycleMimoError):
    def __init__(self, message: str, layer_index: int | None = None):
        super().__init__(message)
        self.layer_index = layer_index


class NetworkStateError(CycleMimoError):
    pass


class CheckpointError(CycleMimoError):
    pass


class DomainError(CycleMimoError):
    pass


class FramingError(CycleMimoError):
    pass


class FittingError(CycleMimoError):
    pass


class TrainingError(CycleMimoError):
    pass


class InsufficientDataError(TrainingError):
    pass


class TrainingStateError(TrainingError):
    pass


class ExperimentError(CycleMimoError):
    def __init__(
        self,
        message: str,
        ebn0_db: float | None = None,
        block_index: int | None = None,
        detector: str | None = None,
    ):
        super().__init__(message)
        self.ebn0_db = ebn0_db
        self.block_index = block_index
        self.detector = detector
