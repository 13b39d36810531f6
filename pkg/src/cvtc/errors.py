"""Exception hierarchy shared by all cvtc modules."""


class CVTCError(Exception):
    """Base class for every error raised by cvtc."""


class InvalidArgumentError(CVTCError, ValueError):
    """An argument is outside the documented domain."""


class NumericError(CVTCError, ArithmeticError):
    """A linear-algebra or root-finding step could not be carried out reliably."""


class TruncationError(NumericError):
    """A truncated Fock expansion lost too much norm.

    Attributes
    ----------
    deficit : float
        ``1 - sum |c|^2`` of the truncated amplitudes.
    """

    def __init__(self, message: str, deficit: float):
        super().__init__(f"{message} (deficit={deficit:.3e})")
        self.deficit = deficit


class InfeasibleError(CVTCError, ValueError):
    """Requested clone fidelities or ratios cannot be realised by any support state."""


class UnsupportedInputError(CVTCError, ValueError):
    """The input state is outside what the requested pipeline models."""
