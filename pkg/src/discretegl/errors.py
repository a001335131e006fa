"""Exception hierarchy shared by every module."""


class DiscreteGLError(Exception):
    """Base class for all errors raised by this package."""


class ModeError(DiscreteGLError):
    """Operation is not available in the requested arithmetic mode."""


class SingularMatrixError(DiscreteGLError):
    pass


class DomainError(DiscreteGLError, ValueError):
    pass


class PreconditionError(DiscreteGLError):
    pass


class SpectrumNotRepresentable(DiscreteGLError):
    """Eigenvalues do not all lie in Q(i); caller should retry in float mode."""


class TruncatedBallError(DiscreteGLError):
    pass


class InputError(DiscreteGLError):
    """Malformed or schema-invalid input document."""


class NonDiagonalizableFound(DiscreteGLError):
    """Raised mid-probe when an element turns out not to be diagonalizable.

    Carries the offending element so the caller can turn it into a verdict.
    """

    def __init__(self, word, matrix, message="non-diagonalizable element found"):
        super().__init__(message)
        self.word = tuple(word)
        self.matrix = matrix
