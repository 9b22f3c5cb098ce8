"""Exception types raised across the package."""


class FlatNewtError(Exception):
    """Base class for all package errors."""


class DomainError(FlatNewtError, ValueError):
    pass


class NonConvexBoundary(DomainError):
    pass


class OpenBoundary(DomainError):
    pass


class DegenerateDomain(DomainError):
    pass


class NonPointContact(DomainError):
    """A vertical support line touches the domain along an edge."""


class NotAngular(FlatNewtError):
    """Both vertical support lines must be angular for this operation."""


class DegenerateInput(FlatNewtError, ValueError):
    """All hull input points are coplanar."""


class EmptyUpperSurface(FlatNewtError):
    pass


class ApexOutsideDomain(FlatNewtError, ValueError):
    pass


class PointOutsideDomain(FlatNewtError, ValueError):
    pass


class NonDifferentiable(FlatNewtError):
    """The evaluation point lies on a crease of a piecewise linear function."""


class ChordTooShort(FlatNewtError):
    pass


class ZeroDenominator(FlatNewtError, ZeroDivisionError):
    pass


class PhiOutOfRange(FlatNewtError, ValueError):
    pass


class HypothesisFailed(FlatNewtError):
    """Raised when a divergence certificate is requested for an angular domain.

    ``trace`` still records the witness ratios probed along the schedule.
    """

    def __init__(self, message, best_ratio=None, trace=()):
        super().__init__(message)
        self.best_ratio = best_ratio
        self.trace = list(trace)


class BudgetExhausted(FlatNewtError):
    def __init__(self, message, best_ratio=None, trace=()):
        super().__init__(message)
        self.best_ratio = best_ratio
        self.trace = list(trace)


class NonFiniteSamples(FlatNewtError, ValueError):
    pass


class AsymmetricInput(FlatNewtError, ValueError):
    pass
