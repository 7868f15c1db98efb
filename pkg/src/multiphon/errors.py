"""Exception hierarchy shared by all toolkit modules."""


class MultiphonError(Exception):
    """Base class for all toolkit errors."""


class InvalidFrequencyError(MultiphonError):
    """A frequency argument was non-positive, non-finite or otherwise unusable."""


class InvalidPitchError(MultiphonError):
    """A pitch name could not be parsed or violates its invariants."""


class InsufficientDataError(MultiphonError):
    """The input is too short or too sparse for the requested analysis."""


class ConfigurationError(MultiphonError):
    """An analysis configuration value is out of its valid range."""


class InvalidToneSpecError(MultiphonError):
    """A tone specification is inconsistent (e.g. violates the Nyquist guard)."""


class DegenerateFitError(MultiphonError):
    """A harmonic-series fit assigned no partials at its optimum."""


class FormatError(MultiphonError):
    """A CSV or file-format violation; carries the offending row when known.

    ``row`` is the 1-based data-row index (header excluded), or None when the
    problem is not attributable to a single row.
    """

    def __init__(self, message: str, row: int | None = None):
        super().__init__(f"row {row}: {message}" if row is not None else message)
        self.row = row
