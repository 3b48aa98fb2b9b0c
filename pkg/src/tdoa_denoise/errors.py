"""Exception hierarchy shared by all modules."""


class TdoaError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMatrixError(TdoaError):
    """Input violates a structural precondition (shape, finiteness, skew-symmetry)."""


class MatrixFormatError(InvalidMatrixError):
    """A serialized matrix/mask file could not be parsed or validated."""


class DegenerateMatrixError(TdoaError):
    """Operation undefined for the zero matrix (no principal direction exists)."""


class NonRecoverableMaskError(TdoaError):
    """The missing-data pattern makes the completion non-unique."""


class LocalizationError(TdoaError):
    """Source position could not be estimated (degenerate sensor geometry)."""


class UndefinedMetricError(TdoaError):
    """Requested quality metric is undefined for this input (zero reference signal)."""


class ConvergenceError(TdoaError):
    """Iterative solver did not converge and strict mode was requested."""
