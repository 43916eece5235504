"""Exception hierarchy shared by all gaitsense modules."""


class GaitsenseError(Exception):
    """Base class for every error raised by this package."""


class InvalidSignal(GaitsenseError):
    """Signal contains NaN/Inf, is empty, or has a non-positive sample rate."""


class ShapeError(GaitsenseError):
    """Array shapes or lengths do not agree."""


class DegenerateInput(GaitsenseError):
    """Statistic undefined for this input (e.g. zero variance)."""


class TooShort(GaitsenseError):
    """Input has too few samples for the requested operation."""


class InsufficientKnots(GaitsenseError):
    """Fewer than two knots for envelope construction."""


class NotOscillatory(GaitsenseError):
    """Signal lacks the extrema needed for sifting."""


class LengthError(GaitsenseError):
    """Length constraint violated (power of two, multiple of 2^levels, ...)."""


class InvalidInput(GaitsenseError):
    """Scalar argument outside its admissible range."""


class InvalidSpec(GaitsenseError):
    """Dataset or generation spec is inconsistent."""


class TooFew(GaitsenseError):
    """Not enough samples per class to split."""


class EmptyDataset(GaitsenseError):
    """Training or evaluation set is empty."""


class NoBeats(GaitsenseError):
    """No heartbeats detected in the window."""


class ProtocolError(GaitsenseError):
    """Malformed, truncated, or unknown wire frame."""


class ChecksumError(ProtocolError):
    """NMEA sentence failed its XOR checksum."""


class UnsupportedSentence(ProtocolError):
    """NMEA sentence type this parser does not handle."""


class NmeaParseError(ProtocolError):
    """NMEA sentence with a malformed field."""
