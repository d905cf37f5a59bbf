"""Exception types raised by the library."""


class IalmError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(IalmError):
    pass


class NotSymmetric(IalmError):
    pass


class NotSPD(IalmError):
    """A pivot or quadratic form revealed the matrix is not positive definite."""


class NegativeQuadraticForm(NotSPD):
    """v^T B v is significantly negative; B cannot be SPD."""


class SingularBlock(NotSPD):
    """A diagonal block failed its Cholesky factorization."""


class Singular(IalmError):
    """Matrix numerically singular (sigma_min below tolerance)."""


class RankDeficient(IalmError):
    """Constraint matrix fails the full-row-rank check."""


class NoConvergence(IalmError):
    """Eigenvalue iteration exceeded its iteration cap."""


class BreakdownError(IalmError):
    """Conjugate-gradient breakdown: direction with non-positive curvature."""


class TooManyBlocks(IalmError):
    """Factorial enumeration requested above the supported cap."""


class TooLarge(TooManyBlocks):
    """Scalar permutation scan requested above the supported cap."""


class ParseError(IalmError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FeatureIndexError(ParseError):
    """Feature index outside the declared width (or non-positive)."""
