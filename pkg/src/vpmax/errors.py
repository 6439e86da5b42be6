"""Exception and warning types shared across the package."""


class GeometryError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(GeometryError):
    """No input points were given."""


class DegenerateInput(GeometryError):
    """Input points do not affinely span the ambient space."""


class DimensionMismatch(GeometryError):
    """Operands live in different (or unsupported) dimensions."""


class CenterNotInterior(GeometryError):
    """The requested polarity center is not strictly inside the polytope."""


class SingularMatrix(GeometryError):
    """An affine map with a singular linear part was requested."""


class IndexOutOfRange(GeometryError, IndexError):
    """A facet or vertex index does not exist."""


class BadArity(GeometryError):
    """A constructor was called with an out-of-range size parameter."""


class BadFacet(GeometryError):
    """A probe referenced a facet that cannot be perturbed as requested."""


class TGridOutsideRegion(GeometryError):
    """A perturbation grid leaves the admissible region of the probe."""


class DegenerateAlongPath(GeometryError):
    """A vertex path produces lower-dimensional bodies."""


class NoConvergence(GeometryError):
    """Iterative solver hit its iteration cap.  Carries the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class StalledBelowTolerance(GeometryError):
    """Ascent step underflowed before reaching the residual target.

    The partial trace is attached as ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class StartGenerationFailed(GeometryError):
    """Could not draw a full-dimensional starting polytope."""


class UnknownSuite(GeometryError):
    """Verification suite name not recognized."""


class SubgradientWarning(UserWarning):
    """A vertex gradient fell back to finite differences at a non-simplicial vertex."""
