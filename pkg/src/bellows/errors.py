"""Exception types raised across the package."""


class BellowsError(Exception):
    """Base class for all package errors."""


# simplicial core
class NotACycle(BellowsError):
    pass


class NoBoundingChain(BellowsError):
    pass


# collapse
class MaximalSimplex(BellowsError):
    """Raised by ``lam`` when the simplex has no proper coface."""


class HypothesisViolated(BellowsError):
    """Two simplices with a common largest facet whose union is missing."""

    def __init__(self, sigma, tau, message=None):
        self.sigma = tuple(sigma)
        self.tau = tuple(tau)
        super().__init__(
            message
            or f"union of {list(self.sigma)} and {list(self.tau)} is not in the complex"
        )


class IllegalStep(BellowsError):
    pass


# gram complexes
class TooLarge(BellowsError):
    pass


class PolicyUnsatisfied(BellowsError):
    pass


class InternalError(BellowsError):
    pass


# geometry
class IsotropicVector(BellowsError):
    pass


class MixedSpaces(BellowsError):
    pass


class AntipodalPair(BellowsError):
    pass


class OmegaViolation(BellowsError):
    pass


class NonRealResult(BellowsError):
    pass


class PathSingularity(BellowsError):
    pass


class ToleranceNotMet(UserWarning):
    """Issued (not raised) when a quadrature misses its target tolerance."""


# polyhedra
class NotBounding(BellowsError):
    pass


class DiameterTooLarge(BellowsError):
    pass


class KappaEdgeConflict(BellowsError):
    def __init__(self, edge, message=None):
        self.edge = tuple(edge)
        super().__init__(message or f"edge {list(self.edge)} is not an edge of K(G, kappa)")


class NoFlexDirection(BellowsError):
    pass


class CorrectorDiverged(BellowsError):
    def __init__(self, message, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace


class ConstructionFailed(BellowsError):
    pass
