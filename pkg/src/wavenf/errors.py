"""Exception types shared across the package."""

from __future__ import annotations


class WavenfError(Exception):
    """Base class for all package errors."""


class AlgebraError(WavenfError):
    """Structural failure in symbolic algebra (bad factor, depth, grading)."""


class MixedNonlocalError(AlgebraError):
    """An antiderivative over a product mixing left- and right-moving fields."""


class ParseError(WavenfError):
    """Malformed model file or coefficient expression."""


class BlowUpError(WavenfError):
    """A spectral integration left the resolvable regime.

    Attributes
    ----------
    time : float
        First time at which the solution was detected as non-finite or
        out of range.
    """

    def __init__(self, message: str, time: float) -> None:
        super().__init__(message)
        self.time = time
