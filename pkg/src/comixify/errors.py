"""Exception hierarchy shared by all pipeline stages."""


class ComixifyError(Exception):
    """Base class for all errors raised by this package."""


class DecodeError(ComixifyError):
    """Video container exists but cannot be decoded."""


class EmptyInputError(ComixifyError):
    """An operation received no frames / no samples to work on."""


class FetchError(ComixifyError):
    """Remote video could not be retrieved."""


class OversizeError(FetchError):
    """Download or upload exceeds the configured byte cap."""


class ModelLoadError(ComixifyError):
    """Weight manifest missing, corrupt, or incompatible with the model."""


class ShapeError(ComixifyError):
    """Tensor/vector dimensions do not match what the operation expects."""


class ConstraintError(ComixifyError):
    """A structural precondition (k | n, m <= T, ...) is violated."""


class DegenerateSelectionError(ComixifyError):
    """A reward was asked for an empty frame selection."""


class DomainError(ComixifyError):
    """Numeric argument outside the operation's domain."""


class TrainingDivergedError(ComixifyError):
    """Loss became NaN/inf during training."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class PipelineStageError(ComixifyError):
    """Wraps any stage failure with the name of the stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"pipeline failed at stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
