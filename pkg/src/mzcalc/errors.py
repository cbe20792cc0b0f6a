"""Exception types raised by the engines.

All derive from :class:`MZError`, itself a ``ValueError``, so callers can
catch the whole family or a single precondition failure.
"""


class MZError(ValueError):
    """Base class for precondition violations."""


class InvalidVisibility(MZError):
    pass


class NonFinitePhase(MZError):
    pass


class DegenerateSchedule(MZError):
    pass


class OutOfRangeL(MZError):
    pass


class InvalidCandidate(MZError):
    pass


class UnknownDetector(MZError):
    pass


class OrderingViolation(MZError):
    pass


class CascadeConfigError(MZError):
    """Malformed cascade tree; ``where`` names the offending field or line."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class NegativeSignal(MZError):
    pass


class NonIntegrableSamples(MZError):
    pass


class InvalidBandwidth(MZError):
    pass
