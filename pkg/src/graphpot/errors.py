"""Exception hierarchy for graphpot."""


class GraphPotError(Exception):
    """Base class for all graphpot errors."""


class InvalidGeometryError(GraphPotError):
    """Geometry descriptor or constructed space violates an invariant."""


class DomainMismatchError(GraphPotError):
    """Operands live on incompatible domains."""


class IncompatibleFamilyError(GraphPotError):
    """Gluing pieces disagree on an overlap vertex."""

    def __init__(self, vertex, message=None):
        self.vertex = vertex
        super().__init__(message or f"pieces disagree at vertex {vertex!r}")


class NotInSortError(GraphPotError):
    """Function has an infinite value where a finite one is required."""


class NotInConeError(GraphPotError):
    """Function is outside the nonnegative superharmonic cone."""


class IrregularDomainError(GraphPotError):
    """Interior system is singular / some interior vertex cannot reach the boundary."""


class MonotonicityError(GraphPotError):
    """Input sequence is not pointwise nondecreasing."""


class ConvergenceError(GraphPotError):
    """Fixed-point iteration did not converge within the iteration cap."""

    def __init__(self, last_change, iterations, message=None):
        self.last_change = last_change
        self.iterations = iterations
        super().__init__(
            message
            or f"no convergence after {iterations} iterations (last change {last_change:.3e})"
        )


class SizeCapError(GraphPotError):
    """Exact oracle called on a space above its size cap."""


class NoGreenFunctionError(GraphPotError):
    """(I - P) is singular on the non-absorbing part; no finite Green function."""


class DisconnectedFromBaseError(GraphPotError):
    """Green value at the base point vanishes for some column."""


class EmptySetError(GraphPotError):
    """Operation requires a non-empty vertex set."""


class NotRepresentableError(GraphPotError):
    """No nonnegative boundary representation within tolerance."""


class WitnessUnavailableError(GraphPotError):
    """Divergence witness requested for a set whose capacity does not vanish."""


class ThinnessUndefinedError(GraphPotError):
    """Thinness queried at a point of the set itself."""


class UnsupportedResolutionError(GraphPotError):
    """Lattice resolution outside the supported set."""


class RefinementError(GraphPotError):
    """Refinement family has inconsistent capacity normalization."""


class DegenerateTestError(GraphPotError):
    """Regularity test point lies in the interior of the obstacle."""


class SchemaError(GraphPotError):
    """Space file violates the input schema."""
