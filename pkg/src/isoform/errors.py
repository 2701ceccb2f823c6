"""Exception types shared across the package."""


class IsoformError(Exception):
    """Base class for all errors raised by this package."""


class RingMismatch(IsoformError):
    """Operands live over different coefficient rings."""


class NonUnitInverse(IsoformError):
    """Attempted to invert an element divisible by p."""


class DimensionMismatch(IsoformError):
    """Vector or matrix dimensions are incompatible."""


class AmbientMismatch(IsoformError):
    """Subspaces live in different ambient spaces."""


class Degenerate(IsoformError):
    """A form required to be non-degenerate has non-unit determinant."""


class NonUnitSlot(IsoformError):
    """Pfister slot entries must be units."""


class NonUnitNorm(IsoformError):
    """Reflection vectors must have unit norm."""


class NotASummand(IsoformError):
    """Rows do not span a free direct summand (dependent residues)."""


class NotSurjective(IsoformError):
    """Matrix does not define a surjection onto a free module."""


class NotInvertible(IsoformError):
    """Square matrix has no inverse over the ring."""


class NotIsotropic(IsoformError):
    """Subspace is not totally isotropic."""


class NotHyperbolic(IsoformError):
    """Form has positive anisotropic rank where a hyperbolic one is required."""


class WrongDimension(IsoformError):
    """Subspace or module has the wrong rank for this operation."""


class Exhausted(IsoformError):
    """Search space exhausted without finding the required subspace.

    ``census`` maps meet-dimension to the number of maximal isotropic
    subspaces realizing it, collected while the enumeration ran; it is the
    evidence that no suitable subspace exists over this field.
    """

    def __init__(self, message, census=None):
        super().__init__(message)
        self.census = dict(census) if census else {}


class NoDeflection(IsoformError):
    """No reflection direction can make the last coordinate a unit."""


class PreconditionViolated(IsoformError):
    """Input fails the stated equation or unimodularity requirement."""


class OutOfRange(IsoformError):
    """Parameters outside the valid range for a closed-form count."""


class BudgetExceeded(IsoformError):
    """Requested enumeration exceeds the exact-arithmetic budget."""
