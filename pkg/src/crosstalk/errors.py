"""Exception hierarchy shared by all stages."""


class CrosstalkError(Exception):
    """Base class for every error raised by this package."""

    code = "CrosstalkError"


class InputError(CrosstalkError, ValueError):
    code = "InputError"


class AlignmentError(InputError):
    code = "AlignmentError"


class NoOccurrenceError(CrosstalkError):
    """A derivative was requested for a string with zero support."""

    code = "NoOccurrenceError"


class InsufficientDataError(CrosstalkError):
    code = "InsufficientDataError"


class ModelExplosionError(CrosstalkError):
    code = "ModelExplosionError"


class ZeroProbabilityHistoryError(CrosstalkError):
    code = "ZeroProbabilityHistoryError"


class DegenerateProcessError(CrosstalkError):
    """Target stream has zero symbol entropy, so a coefficient is undefined."""

    code = "DegenerateProcessError"


class DegenerateQuantizationError(InputError):
    code = "DegenerateQuantizationError"


class ConvergenceError(CrosstalkError):
    code = "ConvergenceError"


class IngestionError(InputError):
    code = "IngestionError"
