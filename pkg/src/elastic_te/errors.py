"""Exception types raised by the engine."""


class ElasticTEError(Exception):
    """Base class for all engine errors."""


class BesselDomainError(ElasticTEError, ValueError):
    """Argument outside the supported domain of a special function."""


class ZeroRefinementError(ElasticTEError, ArithmeticError):
    """Root refinement failed to converge.

    ``bracket`` holds the last sign-change interval.
    """

    def __init__(self, message, bracket):
        super().__init__(f"{message} (last bracket {bracket})")
        self.bracket = bracket


class BoundViolationError(ElasticTEError, ArithmeticError):
    """A computed value fell outside its certified analytic window."""


class ParameterError(ElasticTEError, ValueError):
    """Invalid material parameters, region or bracket indices."""


class DegenerateBracketError(ParameterError):
    """Bracket indices collapse after flooring."""


class NoRootFoundError(ElasticTEError, ArithmeticError):
    """No sign change at maximum scan resolution.

    ``scan`` is a tuple ``(omegas, values)`` of the finest scan.
    """

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan


class NotAnEigenvalueError(ElasticTEError, ArithmeticError):
    """The boundary system is not numerically singular at the given frequency."""


class InconsistentNullspaceError(NotAnEigenvalueError):
    """Nullvector fails the residual check at secondary angles."""


class DegenerateAngleError(ElasticTEError, ValueError):
    """Angular factors vanish (or nearly so) at the requested evaluation angle."""


class ConsistencyError(ElasticTEError, AssertionError):
    """An internal consistency assertion failed."""


class DegenerateModeError(ElasticTEError, ValueError):
    """Normalization requested for a side with zero norm."""
