"""Exception types shared across the package."""


class DomainError(ValueError):
    """Parameters fall outside the region where the eigenproblem is real symmetric."""


class PreconditionError(ValueError):
    """An input that must satisfy a numerical condition (e.g. a verified root) does not."""


class NumericalFailure(RuntimeError):
    """An iterative routine did not converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InconsistencyError(RuntimeError):
    """Two results that must agree by theory do not (usually a quadrature failure)."""
