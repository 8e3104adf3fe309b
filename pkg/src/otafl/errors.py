"""Exception types raised across the simulator."""


class OTAFLError(Exception):
    """Base class for simulator errors."""


class InvalidGeometryError(OTAFLError, ValueError):
    pass


class DegenerateChannelError(OTAFLError, ValueError):
    """A selected user's effective gain aᴴh_k is numerically zero."""

    def __init__(self, message, user=None):
        super().__init__(message)
        self.user = user


class DimensionMismatchError(OTAFLError, ValueError):
    pass


class InvalidWeightError(OTAFLError, ValueError):
    pass


class NonHermitianError(OTAFLError, ValueError):
    pass


class InfeasibleDirectionError(OTAFLError, ValueError):
    pass


class SubproblemInfeasibleError(OTAFLError, RuntimeError):
    pass


class EmptyDatasetError(OTAFLError, ValueError):
    pass


class TooFewSamplesError(OTAFLError, ValueError):
    pass


class IdxFormatError(OTAFLError, ValueError):
    """Malformed IDX file. ``kind`` is one of bad-magic, truncated-file, count-mismatch."""

    def __init__(self, message, kind):
        super().__init__(message)
        self.kind = kind


class ConfigError(OTAFLError, ValueError):
    """Bad configuration. ``kind`` is one of unknown-key, type-error, constraint-violation."""

    def __init__(self, message, kind):
        super().__init__(message)
        self.kind = kind


class RoundError(OTAFLError, RuntimeError):
    """Any simulator error raised inside a round, tagged with the round index."""

    def __init__(self, round_index, cause):
        super().__init__(f"round {round_index}: {cause}")
        self.round_index = round_index
        self.cause = cause
