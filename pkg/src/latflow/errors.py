"""Exception types shared across the package."""


class LatflowError(Exception):
    pass


class SingularBasis(LatflowError):
    """Basis matrix has determinant below the invertibility threshold."""


class ZeroVector(LatflowError):
    """Operation requires a nonzero vector."""


class DegenerateVector(LatflowError):
    """Operation requires all coordinates nonzero."""


class ZeroGauge(LatflowError):
    """Gauge functional evaluated to zero where a positive value is required."""


class BadParams(LatflowError):
    """Invalid generator kind or parameters."""


class BudgetExceeded(LatflowError):
    """Certified search would exceed the candidate/node budget.

    Carries the offending size so callers can report the feasibility bound.
    """

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class InsufficientSamples(LatflowError):
    """Not enough samples in the asymptotic shell to form an estimate."""


class MissingEstimates(LatflowError):
    """An estimate required by a relation check was not supplied."""


class NotIrrational(LatflowError):
    """Lattice has a point on a coordinate axis; degeneracy check not applicable."""

    def __init__(self, message, axis_point=None):
        super().__init__(message)
        self.axis_point = axis_point


class OutOfDomain(LatflowError):
    """Argument outside the function's domain."""
