"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class InfeasibleError(DomainError):
    """No feasible point exists for the requested problem (e.g. an empty grid)."""


class IncompatibleError(DomainError):
    """Two objects that must describe the same policy disagree."""
