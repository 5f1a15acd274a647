"""Exception types shared across the package.

The CLI maps these onto exit codes: validation failures exit 1,
convergence failures exit 2, refusals exit 3.
"""


class ValidationError(ValueError):
    """Malformed input: bad shapes, broken preconditions, unknown config keys."""


class DimensionError(ValidationError):
    """Operands belong to different algebras or have incompatible shapes."""


class DegenerateMetricError(ValidationError):
    """Metric operator is not symmetric positive definite."""


class IllConditionedError(RuntimeError):
    """A linear solve was requested on a matrix with condition number above the cap."""


class ConvergenceError(RuntimeError):
    """An iterative routine stopped without meeting its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class GenericityError(RuntimeError):
    """Could not produce a generic element within the resample budget."""


class NoWitnessError(RuntimeError):
    """The bundle is fat: no commuting (m, p) pair exists to certify against."""

    def __init__(self, message: str, deficit: float | None = None):
        super().__init__(message)
        self.deficit = deficit


class NotApplicableError(ValidationError):
    """The question is empty for this input (e.g. fatness when the fiber is a point)."""
