"""Exception types shared across the package."""


class DatasetError(ValueError):
    """Base class for dataset loading problems."""


class EmptyDatasetError(DatasetError):
    """File parsed but contains no samples."""


class RaggedRowsError(DatasetError):
    """CSV rows have inconsistent lengths."""


class NonNumericError(DatasetError):
    """CSV contains entries that do not parse as numbers."""


class CheckpointError(ValueError):
    """Base class for checkpoint problems."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint was written by an incompatible format version."""


class CheckpointCorruptError(CheckpointError):
    """Checkpoint is truncated or otherwise unreadable."""


class ConfigError(ValueError):
    """Invalid training configuration; message names the offending field."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss. Carries the state for diagnostics."""

    def __init__(self, message, state=None, round_index=None):
        super().__init__(message)
        self.state = state
        self.round_index = round_index
