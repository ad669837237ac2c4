"""Exception hierarchy shared by every module of the package."""


class ToricGKError(Exception):
    """Base class for all package errors."""


class PolytopeError(ToricGKError, ValueError):
    """The facet description does not define a nonempty bounded interior."""


class DomainError(ToricGKError, ValueError):
    """A point lies outside the open polytope."""


class ConvexityError(ToricGKError, ValueError):
    """The Hessian of the symplectic potential is not positive-definite.

    Attributes
    ----------
    point : ndarray
        First offending evaluation point.
    min_eigenvalue : float
    """

    def __init__(self, message, point=None, min_eigenvalue=None):
        super().__init__(message)
        self.point = point
        self.min_eigenvalue = min_eigenvalue


class GridTooCoarseError(ToricGKError, ValueError):
    """No grid point survives the interior margin filter."""


class InadmissibleParamsError(ToricGKError, ValueError):
    """``I + 1/4 (S^-1/2 F S^-1/2)^2`` fails to be positive-definite."""

    def __init__(self, message, min_eigenvalue=None, point=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.point = point


class ConditioningError(ToricGKError, ArithmeticError):
    """A matrix that must be inverted is numerically singular."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class EquivarianceError(ToricGKError, ArithmeticError):
    """No Clifford-equivariant map exists between two spinor models."""
