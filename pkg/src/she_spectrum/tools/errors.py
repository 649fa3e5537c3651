"""Exception types raised by the numerical library.

The CLI layer maps these onto exit codes: :class:`InvalidInputError` is a
usage problem (exit 2), :class:`PreconditionError` a numeric precondition
such as the explicit-Euler stability bound or grid divisibility (exit 3).
"""


class SpectrumError(Exception):
    """Base class for every error raised by she_spectrum."""


class InvalidInputError(SpectrumError, ValueError):
    """Raised for malformed arguments: wrong lengths, ranges or boundary values."""


class AsymmetricMatrixError(InvalidInputError):
    """Raised when a dense solver receives a matrix that is not symmetric."""


class EmptySampleError(InvalidInputError):
    """Raised when a statistic is requested on an empty sample."""


class PreconditionError(SpectrumError):
    """Raised when a numeric precondition of a study is violated."""


class DivisibilityError(PreconditionError):
    """Raised when a coarse grid cannot be coupled to a fine Brownian path.

    Attributes:
        fine_n: The number of fine steps of the offending path.
        n: The number of interior points that was requested.
        suggested_fine_n: A fine grid size compatible with the request, when known.
    """

    def __init__(self, message: str, fine_n: int, n: int, suggested_fine_n: int | None = None):
        super().__init__(message)
        self.fine_n = fine_n
        self.n = n
        self.suggested_fine_n = suggested_fine_n


class StabilityError(PreconditionError):
    """Raised when an explicit time step exceeds the stability bound.

    Attributes:
        dt: The requested time step.
        max_dt: The largest admissible time step, dx**2 / (2 * beta).
    """

    def __init__(self, message: str, dt: float, max_dt: float):
        super().__init__(message)
        self.dt = dt
        self.max_dt = max_dt


class SingularGramError(SpectrumError):
    """Raised when the Gram matrix of a trial basis is not positive definite.

    This signals a degenerate trial basis on the chosen grid, e.g. more sine
    modes than interior points.
    """
