"""Exception types shared across the package.

Every error raised by the library derives from :class:`XiSpectraError` so
callers (and the CLI) can distinguish library failures from programming
errors.
"""


class XiSpectraError(Exception):
    """Base class for all library errors."""


class TiesPresent(XiSpectraError):
    """Tied values encountered while ranking under the ``error`` tie policy."""


class InvalidSample(XiSpectraError):
    """Input contains non-finite values or is otherwise not a valid sample."""


class SizeMismatch(XiSpectraError):
    """Operands have incompatible sizes (e.g. permutations on different n)."""


class EnumerationTooLarge(XiSpectraError):
    """Requested exhaustive enumeration exceeds the configured guard."""


class NotSymmetric(XiSpectraError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class EigenFailure(XiSpectraError):
    """Eigenvalue decomposition failed to converge or violated identities."""


class RangeExceeded(XiSpectraError):
    """Argument outside the range for which exact evaluation is guarded."""


class DegenerateColumn(XiSpectraError):
    """A data column has zero variance where Pearson correlation is needed."""


class NotPSD(XiSpectraError):
    """Matrix expected to be positive semi-definite is not, beyond tolerance."""


class OddDimension(XiSpectraError):
    """Model requires an even number of columns."""


class CalibrationTooSmall(XiSpectraError):
    """Monte-Carlo calibration requested with too few replications."""


class NotDistributionFree(XiSpectraError):
    """Null calibration requested for a statistic whose null law depends on
    the sampling model, without explicitly allowing it."""
