"""Exception hierarchy shared by the library and the command line runner."""


class XftError(Exception):
    """Base class for every error raised by :mod:`wignerxft`."""


class InvalidInputError(XftError, ValueError):
    """An argument is malformed (wrong shape, non-finite entries, bad range)."""


class InvalidStateError(XftError, ValueError):
    """A variance matrix is not positive definite or not physical."""


class NumericalDegeneracyError(XftError, ArithmeticError):
    """A computation is too ill-conditioned to be trusted, or the data are degenerate."""


class DivergenceUndefinedError(XftError, ArithmeticError):
    """The Renyi overlap integral diverges: the mixed precision matrix is not positive definite.

    This is the "+infinity" outcome and is kept distinct from numerical failure.
    """


class InsufficientBinsError(NumericalDegeneracyError):
    """Too few paired histogram bins to fit a fluctuation-relation slope."""

    def __init__(self, n_pairs: int, required: int = 5):
        self.n_pairs = n_pairs
        self.required = required
        super().__init__(f"only {n_pairs} paired bins usable, need at least {required}")


class ResolutionError(NumericalDegeneracyError):
    """Characteristic-function inversion produced aliasing artefacts."""


class PreconditionError(XftError, ValueError):
    """An oracle was called outside the regime where it is valid."""


class HeavyTailWarning(RuntimeWarning):
    """Exponential moments overflowed and part of the samples had to be trimmed."""
