"""Exception types raised by the package."""


class InvMMDError(ValueError):
    """Base class for all domain errors."""


class GridMismatch(InvMMDError):
    pass


class ZeroVariance(InvMMDError):
    pass


class DegeneratePool(InvMMDError):
    pass


class DegenerateSignal(InvMMDError):
    pass


class SampleTooSmall(InvMMDError):
    pass


class AllDegenerate(InvMMDError):
    pass


class BandInvalid(InvMMDError):
    pass


class TooShort(InvMMDError):
    pass


class NoValidStart(InvMMDError):
    pass


class InsufficientData(InvMMDError):
    pass
