"""Exception types shared across the package."""


class CftdistError(Exception):
    """Base class for all package errors."""


class GridError(CftdistError, ValueError):
    """Invalid grid configuration (size, bounds, spacing)."""


class FieldError(CftdistError, ValueError):
    """Test-function data violates a precondition (reality, support, decay)."""


class ParameterError(CftdistError, ValueError):
    """Out-of-range family or map parameter."""


class FlowDegeneracyError(CftdistError, RuntimeError):
    """Integrated circle flow lost monotonicity (step too large / field too strong)."""


class FredholmError(CftdistError, RuntimeError):
    """The discretized welding system is singular or could not be assembled."""


class WeldingAccuracyError(CftdistError, RuntimeError):
    """Welding solve finished but the junction residual exceeds tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CriticalPointError(CftdistError, RuntimeError):
    """A map derivative vanished where a chain rule or logarithm needs it."""


class FlowSingularityError(CftdistError, RuntimeError):
    """Moment-flow blow-up detected before reaching the requested parameter."""

    def __init__(self, message, last_safe=None):
        super().__init__(message)
        self.last_safe = last_safe


class ThermalCollapseError(CftdistError, RuntimeError):
    """Inverse temperature reached zero along the coupled thermal flow."""

    def __init__(self, message, last_safe=None):
        super().__init__(message)
        self.last_safe = last_safe


class DomainError(CftdistError, ValueError):
    """Input function leaves the admissible domain of an operation (e.g. f < 0)."""


class AccuracyWarning(UserWarning):
    """A result is returned but an internal accuracy check could not be certified."""
