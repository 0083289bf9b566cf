"""Exception hierarchy shared across the package."""


class ModelSetsError(Exception):
    """Base class for every error raised by this package."""


class QFieldError(ModelSetsError):
    """Bad quadratic-field arithmetic (division by zero, mixed discriminants)."""


class NoSolutionError(ModelSetsError):
    """An exact linear system has no solution."""


class SingularMatrixError(ModelSetsError):
    """Inverse of a singular matrix was requested."""


class ValidationError(ModelSetsError):
    """Input data (scheme, window, config, CLI arguments) fails validation."""


class DegenerateWindowError(ValidationError):
    """Zonotope construction received degenerate generators."""


class InvariantViolationError(ModelSetsError):
    """A structural invariant that must hold by theory failed at runtime.

    Raised e.g. when a semigroup product leaves the enumerated set or an
    action result is not a valid hull point.  Indicates a bug or a genuine
    gap in the underlying theory; the CLI reports it with exit code 3.
    """


class StabilizationError(ModelSetsError):
    """An iterative limit computation did not stabilize within its schedule."""
