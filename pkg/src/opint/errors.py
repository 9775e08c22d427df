"""Exception hierarchy shared by every opint module."""


class OpintError(Exception):
    """Base class for all library errors."""


class InvalidInputError(OpintError, ValueError):
    """Operand is malformed: non-square, non-finite, wrong arity, bad spec."""


class ConvergenceError(OpintError):
    """An iterative procedure failed to stagnate within its term budget."""


class IllConditionedError(OpintError):
    """A solve or decomposition is too ill-conditioned to trust.

    ``value`` carries the offending quantity (spectral gap or residual).
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class AmbiguousClusteringError(OpintError):
    """Two eigenvalue clusters sit too close to be told apart reliably."""

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class DomainError(OpintError, ValueError):
    """A spectrum point falls on a pole or branch cut of the function."""


class UnsupportedOrderError(OpintError, ValueError):
    """Requested derivative order exceeds the supported jet depth."""


class PreconditionError(OpintError, ValueError):
    """A theorem check was called on inputs violating its hypotheses."""


class PathError(OpintError):
    """A matrix path left the structure-preserving regime."""


class DegenerateInputError(OpintError, ValueError):
    """Input makes a check vacuous (for example every term is zero)."""
