"""Exception hierarchy shared by all modules."""


class DKPError(Exception):
    """Base class for every error raised by this package."""


class InvariantError(DKPError, ValueError):
    """Input data violates a lattice-state invariant (e.g. a vanishing B entry)."""


class ConstraintError(InvariantError):
    """The torus size (N, M) is outside the supported range."""


class StateFileError(DKPError, ValueError):
    """A state file could not be parsed."""


class DegenerateError(DKPError, ArithmeticError):
    """A numerical construction hit a non-generic configuration."""


class InternalError(DKPError, RuntimeError):
    """A construction produced a value that should be impossible."""
