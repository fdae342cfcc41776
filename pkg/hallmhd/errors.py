class HallMHDError(Exception):
    """Base class for every error raised by the package."""


class ShapeError(HallMHDError, ValueError):
    pass


class GridMismatchError(HallMHDError, ValueError):
    pass


class ParameterError(HallMHDError, ValueError):
    pass


class PreconditionError(HallMHDError, ValueError):
    pass


class InequalityViolation(HallMHDError, ArithmeticError):
    """An inequality that must hold up to round-off was violated."""


class StateError(HallMHDError, RuntimeError):
    pass


class DivergenceError(HallMHDError, RuntimeError):
    """
    The simulation produced non-finite or runaway coefficients.
    Carries the ledger accumulated so far and the last state that was still valid.
    """

    def __init__(self, message: str, ledger=None, state=None):
        super().__init__(message)
        self.ledger = ledger
        self.state = state


class ConfigError(HallMHDError, ValueError):
    pass


class PlotDataError(HallMHDError, ValueError):
    pass


class SnapshotError(HallMHDError, ValueError):
    """A snapshot file is truncated or not in HMHD1 format."""


class DivergenceFlagError(HallMHDError, ArithmeticError):
    """A field flagged divergence-free has a divergence beyond round-off."""
