"""Exception types shared across the engine."""


class DomainError(ValueError):
    """An argument lies outside the mathematically valid domain."""


class ValidationError(ValueError):
    """A model object or configuration violates a structural invariant."""


class GridAlignmentError(ValueError):
    """Two duration grids that must coincide do not."""


class UnsupportedModelError(ValueError):
    """The operation requires a model form the engine does not support."""


class NumericalBlowupError(RuntimeError):
    """An ODE integration produced a non-finite value."""

    def __init__(self, message: str, duration: float | None = None):
        super().__init__(message)
        self.duration = duration
