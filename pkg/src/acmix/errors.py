"""Exception hierarchy shared by the library and the CLI."""


class AcmixError(Exception):
    """Base class for all errors raised by acmix."""


class InvalidArgument(AcmixError, ValueError):
    pass


class MalformedHeader(AcmixError):
    pass


class UnsupportedFormat(AcmixError):
    pass


class StreamExhausted(AcmixError):
    """The coded payload ended before every symbol could be decoded."""


class TrailingData(AcmixError):
    """Bytes remain after the last coded symbol."""
