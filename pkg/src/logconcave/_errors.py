class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ResourceError(RuntimeError):
    """An enumeration or census would exceed its configured budget."""


class SolverError(RuntimeError):
    """Numerical integration failed (step underflow, blow-up)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
