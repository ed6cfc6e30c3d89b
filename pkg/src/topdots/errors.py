"""Exception types shared across the package."""


class TopdotsError(Exception):
    """Base class for all errors raised by this package."""


class MatrixFormatError(TopdotsError):
    """Malformed or ambiguous matrix input (bad header, bad index, duplicates)."""


class DimensionMismatchError(TopdotsError):
    """Two matrices do not share the common row dimension."""


class ZeroMassError(TopdotsError):
    """A sampling distribution has zero total weight; sampling is infeasible."""
