"""Exception types raised by the lab."""


class DnlsError(Exception):
    """Base class for all lab errors."""


class NotPowerOfTwo(DnlsError, ValueError):
    pass


class GridMismatch(DnlsError, ValueError):
    pass


class RegimeUnsupported(DnlsError, ValueError):
    """(omega, c) lies outside the range where traveling waves exist."""


class TailTooFat(DnlsError, ValueError):
    """The profile has not decayed at half a period from its center."""


class StepBreaksRegime(DnlsError, ValueError):
    """A finite-difference stencil leaves the subcritical region."""


class LeftTailNotDecayed(DnlsError, ValueError):
    pass


class NonFinite(DnlsError, FloatingPointError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NoConvergence(DnlsError, RuntimeError):
    pass


class RegimeLost(DnlsError, RuntimeError):
    pass


class SeparationTooSmall(DnlsError, ValueError):
    pass


class RankDeficient(DnlsError, ValueError):
    pass


class TrackingFailed(DnlsError, RuntimeError):
    """A modulation fit failed at some observed time ``t``."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
