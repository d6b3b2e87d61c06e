"""Exception types shared across the package."""


class OtkError(Exception):
    """Base class for all otk errors."""


class NotHermitian(OtkError):
    """Matrix handed to a Hermitian-only routine is not Hermitian."""


class ConvergenceFailure(OtkError):
    """An iterative solver hit its iteration cap before meeting its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SizeOverflow(OtkError):
    """Requested matrix or tensor dimension exceeds the configured cap."""


class EmptyInput(OtkError):
    """A non-empty collection was required."""


class LengthMismatch(OtkError):
    """Shift length does not match the tuple length."""


class NotUnitVector(OtkError):
    """Vector is not normalized to unit length within tolerance."""


class UnknownName(OtkError):
    """Unknown gallery instance name."""


class NotNormalCommuting(OtkError):
    """Tuple is not simultaneously unitarily diagonalizable within tolerance."""


class ConfigError(OtkError):
    """Invalid suite configuration or input file."""


class ConsistencyError(OtkError):
    """An internal numerical invariant was violated (indicates a bug)."""
