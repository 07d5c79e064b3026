"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(ValueError):
    """A kernel was evaluated exactly on its integrable singularity."""


class AliasingError(RuntimeError):
    """A Fourier-route result carried an imaginary residue above threshold."""


class ConditioningError(RuntimeError):
    """Cholesky factorization failed even after the maximal ridge."""


class UnsupportedError(ValueError):
    """The requested parameter range is not covered by the operation."""


class BudgetError(RuntimeError):
    """The estimated work exceeds the configured budget."""


class TruncationError(ValueError):
    """The input support is not covered by the computational window."""


class AccuracyWarning(UserWarning):
    """An internal error estimate exceeded its advisory threshold."""


class UnderflowWarning(UserWarning):
    """A result underflowed to zero in double precision."""
