"""Exception hierarchy shared by the library and the command line."""


class LipsegError(ValueError):
    """Base class for precondition failures raised by lipseg."""


class LipDomainError(LipsegError):
    """A grey tone or scalar lies outside the domain of a LIP operation."""


class RangeViolationError(LipDomainError):
    """A pixel-wise transform pushed a pixel outside ``[0, M)``."""

    def __init__(self, message, row=None, col=None, value=None):
        super().__init__(message)
        self.row = row
        self.col = col
        self.value = value


class EmptyRegionError(LipsegError):
    pass


class DimensionMismatchError(LipsegError):
    pass


class EmptySeedError(LipsegError):
    pass


class SeedNotHomogeneousError(LipsegError):
    pass


class DegenerateContractionError(LipsegError):
    """Contraction would have to remove a seed pixel to make progress."""


class ImageFormatError(Exception):
    """Malformed, truncated or unsupported image file."""
