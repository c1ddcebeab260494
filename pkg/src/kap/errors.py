"""Exception hierarchy shared by every kap module."""


class KapError(Exception):
    """Base class for all library errors."""


# field / params
class InvalidN(KapError, ValueError):
    pass


class ZeroInverse(KapError, ZeroDivisionError):
    pass


class NotPrime(KapError, ValueError):
    pass


class UnknownOwf(KapError, KeyError):
    pass


# protocol
class ProtocolError(KapError):
    """An honest run never raises these; they signal misuse or a bad transcript."""


class OutOfOrder(ProtocolError):
    pass


class LengthMismatch(ProtocolError):
    pass


class NoMatch(ProtocolError):
    pass


class RangeError(ProtocolError):
    pass


# attack
class TooLarge(KapError):
    pass


class InvalidGuess(KapError, ValueError):
    pass


class NoCandidate(KapError):
    pass


class ZeroW(KapError):
    pass


# wire
class WireError(KapError):
    pass


class BadLength(WireError):
    pass


class NotCanonical(WireError):
    pass


class BadType(WireError):
    pass


class ParseError(WireError):
    pass


class ValidationError(WireError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class OrderError(WireError):
    pass
