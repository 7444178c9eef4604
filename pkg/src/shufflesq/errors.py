"""Exception types raised across the package."""


class ShuffleSquareError(Exception):
    """Base class for all package errors."""


class InvalidSymbol(ShuffleSquareError, ValueError):
    def __init__(self, position, char=None):
        self.position = position
        self.char = char
        super().__init__(f"invalid symbol {char!r} at position {position}")


class EmptyWord(ShuffleSquareError, ValueError):
    pass


class NotSigma2(ShuffleSquareError, ValueError):
    pass


class TooLarge(ShuffleSquareError):
    """An exact computation was asked to go beyond its configured limit."""


class NotShuffleSquare(ShuffleSquareError):
    pass


class NoStitchFound(ShuffleSquareError):
    pass


class OddParity(ShuffleSquareError, ValueError):
    pass


class DomainError(ShuffleSquareError, ValueError):
    pass


class InvariantViolation(ShuffleSquareError, AssertionError):
    """Internal consistency check failed; indicates a bug."""


class StreamExhausted(ShuffleSquareError):
    """The input ran out in the middle of a phase.

    ``state`` carries whatever partial information the phase had built up.
    """

    def __init__(self, state=None):
        self.state = state or {}
        super().__init__(f"input exhausted during {self.state.get('phase', 'run')}")
