"""Exception taxonomy shared by all fusetext modules."""


class FusetextError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(FusetextError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class ContractError(FusetextError, ValueError):
    """A caller violated an operation precondition (bad range, bad value)."""


class GraphError(FusetextError, RuntimeError):
    """Misuse of the differentiation tape (non-scalar backward, reuse)."""


class DataError(FusetextError, ValueError):
    """A data file failed to parse or validate."""


class ConfigError(FusetextError, ValueError):
    """A run configuration failed to validate."""


class CheckpointError(FusetextError, ValueError):
    """A model checkpoint is missing, corrupt, or from an unknown format."""


class TrainingError(FusetextError, RuntimeError):
    """Training aborted (non-finite loss, unusable dataset)."""
