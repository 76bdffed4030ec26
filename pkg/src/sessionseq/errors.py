"""Exception types shared across the package."""


class SessionSeqError(Exception):
    """Base class for all errors raised by this package."""


class EventNameError(SessionSeqError, ValueError):
    """Base class for malformed event names."""


class ComponentCountError(EventNameError):
    """Event name does not have exactly six colon-separated components."""


class CharsetError(EventNameError):
    """A name component contains characters outside [a-z0-9_]."""


class EmptyRequiredComponent(EventNameError):
    """The client or action component of an event name is empty."""


class PatternSyntaxError(SessionSeqError, ValueError):
    """A regex-mode event pattern failed to compile."""


class AlphabetExhausted(SessionSeqError):
    """More distinct event names than available code points."""


class UnknownEvent(SessionSeqError, KeyError):
    """Event name not present in the encoding dictionary."""


class UnknownSymbol(SessionSeqError, KeyError):
    """Code point not present in the encoding dictionary.

    ``position`` is the offending index when decoding a sequence, else None.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class DictionaryMismatch(SessionSeqError):
    """Sessions and query were encoded with different dictionaries."""


class EmptyFunnel(SessionSeqError, ValueError):
    """A funnel must have at least one stage."""


class EmptyCorpus(SessionSeqError, ValueError):
    """Model training requires a non-empty corpus."""
