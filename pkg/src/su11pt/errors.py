"""Exception hierarchy shared by all modules."""


class SU11Error(Exception):
    """Base class for library errors."""


class InvalidDimensionError(SU11Error, ValueError):
    pass


class DomainError(SU11Error, ValueError):
    pass


class ShapeError(SU11Error, ValueError):
    pass


class DegenerateParametersError(SU11Error, ValueError):
    """Omega + omega = 0 together with G = 0 leaves eta undefined."""


class NoPeriodError(SU11Error, ValueError):
    """A loop integral over one driving period was requested with omega = 0."""


class NumericError(SU11Error, ArithmeticError):
    """A numeric construction failed; ``diagnostics`` says why."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class StabilityError(NumericError):
    """Time step too coarse for the explicit integrator."""

    def __init__(self, message, suggested_steps: int):
        super().__init__(message, suggested_steps=suggested_steps)
        self.suggested_steps = suggested_steps


class ConvergenceWarning(UserWarning):
    pass
