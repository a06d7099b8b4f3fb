"""Exception hierarchy shared across the toolkit."""


class MtspikeError(Exception):
    """Base class for all toolkit errors."""


class NonFiniteValueError(MtspikeError):
    """A trace contains a NaN or infinite entry.

    Coordinates are 1-based (trial, frame), matching the external convention.
    """

    def __init__(self, trial: int, frame: int):
        self.trial = trial
        self.frame = frame
        super().__init__(f"non-finite value at trial {trial}, frame {frame}")


class EmptyTrialError(MtspikeError):
    """Trace matrix has fewer than 2 frames or no trials."""


class BadSampleRateError(MtspikeError):
    """Sample rate is not a positive finite number."""


class DimensionMismatchError(MtspikeError):
    """Array arguments disagree in shape or length."""


class BadRangeError(MtspikeError):
    """Segment bounds violate 1 <= a <= b <= T."""


class BadPenaltyError(MtspikeError):
    """Penalty sequence contains a nonpositive or nonfinite entry."""


class BadGammaError(MtspikeError):
    """Decay parameter outside the open interval (0, 1)."""


class TooLongError(MtspikeError):
    """Input too long for exhaustive enumeration."""


class ConstantTraceError(MtspikeError):
    """Autocorrelation is undefined for a constant trace."""


class NegativeRateError(MtspikeError):
    """Rate field contains negative entries."""


class ZeroWeightError(MtspikeError):
    """Weight sequence sums to zero."""


class OutOfDomainError(MtspikeError):
    """Requested (trial, frame) lies outside the simulation domain."""


class TrialError(MtspikeError):
    """Wraps a per-trial failure with the offending trial attached (1-based)."""

    def __init__(self, trial: int, cause: Exception):
        self.trial = trial
        self.cause = cause
        super().__init__(f"trial {trial}: {cause}")


class ParseError(MtspikeError):
    """Malformed input file; carries line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)


class MissingInputError(MtspikeError):
    """A required input file or directory does not exist."""
