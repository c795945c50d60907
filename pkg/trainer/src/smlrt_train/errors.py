class TrainerError(Exception):
    """Base class for trainer errors."""


class FormatError(TrainerError):
    """On-disk database or model bytes violate the documented format."""


class EmptyDatasetError(TrainerError):
    """Database region holds no usable samples."""


class DivergedTrainingError(TrainerError):
    """Training loss became NaN/inf."""


class NonFiniteWeightsError(TrainerError):
    """Refusing to export a model with NaN/inf parameters."""
