"""Exception hierarchy, mapped to CLI exit codes (data=2, numerical=3)."""


class ValleyfinderError(Exception):
    """Base class for all toolkit errors."""


class DataError(ValleyfinderError):
    """Unusable input: missing files, malformed records, too few samples."""

    exit_code = 2


class NumericalError(ValleyfinderError):
    """A computation failed: degenerate fits, unbracketed roots, broken monotonicity."""

    exit_code = 3
