"""Shared exception types for the pore-metrics package."""


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


class InsufficientDepthError(RuntimeError):
    """A truncated dyadic enumeration cannot certify the requested quantity.

    ``tail_mass`` is the mass still unaccounted for below the deepest
    enumerated generation; ``partial`` carries whatever one-sided bound was
    achieved before giving up.
    """

    def __init__(self, message, tail_mass=None, partial=None):
        super().__init__(message)
        self.tail_mass = tail_mass
        self.partial = partial
