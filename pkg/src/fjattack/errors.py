"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a declared structural constraint."""


class ConvergenceError(RuntimeError):
    """A linear system is singular/ill-conditioned or the dynamics do not contract."""


class CapExceededError(RuntimeError):
    """An exhaustive search space is larger than the configured cap."""
