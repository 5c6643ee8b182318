"""Exception types shared across pslab."""


class PSLabError(Exception):
    """Base class for all pslab errors."""


class DomainError(PSLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class PrecisionExhausted(PSLabError, ArithmeticError):
    """A floor/ordering decision could not be made within the precision cap.

    The offending inputs are kept as attributes so callers can report them.
    """

    def __init__(self, message, *, n=None, r=None, d=None, bits=None):
        super().__init__(message)
        self.n = n
        self.r = r
        self.d = d
        self.bits = bits

    def where(self):
        parts = [f"{k}={v}" for k, v in (("n", self.n), ("r", self.r), ("d", self.d)) if v is not None]
        return ", ".join(parts)


class ResourceLimit(PSLabError, RuntimeError):
    """The requested computation exceeds a configured size cap."""


class EmptyInput(PSLabError, ValueError):
    """An operation that needs at least one point received none."""


class DegenerateWindow(PSLabError, ValueError):
    """A short-interval window [M, N) is empty."""
