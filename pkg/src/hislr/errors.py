"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
to process status without a lookup table: 1 validation, 2 I/O, 3 numerical.
"""


class HislrError(Exception):
    exit_code = 1


class ValidationError(HislrError, ValueError):
    """Bad argument or violated precondition."""


class DimensionError(ValidationError):
    pass


class DataError(ValidationError):
    """Non-finite values on ingest."""


class RangeError(ValidationError):
    """Value not representable in the requested storage dtype."""


class MatrixFormatError(HislrError):
    """Bad magic bytes, unknown version or dtype code."""

    exit_code = 2


class CorruptFileError(MatrixFormatError):
    """Header and payload disagree."""


class NumericalError(HislrError):
    exit_code = 3
