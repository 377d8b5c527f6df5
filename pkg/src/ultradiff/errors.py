"""Exception types shared across the package."""


class UltradiffError(Exception):
    """Base class for all errors raised by this package."""


class TruncationExhausted(UltradiffError):
    """A sup/inf over a truncated table could not be certified.

    Raised when the optimizer of a growth functional lands on (or past) the
    last stored index, so the true extremum may lie beyond the truncation.
    The fix is to rebuild the weight sequence with a longer table.
    """


class UnderResolvedGrid(UltradiffError):
    """A sampled input grid is too coarse for the requested frequencies."""


class SymbolParseError(UltradiffError):
    """Malformed symbol expression.

    Attributes
    ----------
    position : int
        Character offset in the input where parsing failed.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class TrajectoryBlowup(UltradiffError):
    """A numerically integrated curve left the trusted region."""


class DivergentLimit(UltradiffError):
    """A limiting procedure showed uncontrolled growth instead of settling."""
