"""Exception hierarchy shared by every torusflow module."""


class TorusFlowError(Exception):
    """Base class for all library errors."""


class DimensionError(TorusFlowError, ValueError):
    """Vectors of incompatible length were combined."""


class DomainError(TorusFlowError, ValueError):
    """A point lies outside the domain of a chart or operation."""


class ModelError(TorusFlowError, ValueError):
    """A manifold model (fan, weights, descriptor) is invalid."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class GenericityError(TorusFlowError):
    """The generator a0 pairs to zero with a weight that matters.

    ``witnesses`` lists the offending weights (and where they occur).
    """

    def __init__(self, message, witnesses=None):
        super().__init__(message)
        self.witnesses = list(witnesses or [])


class InferenceError(TorusFlowError):
    """Numeric weight inference produced a non-integral residual."""


class SwitchingThrashError(TorusFlowError):
    """The integrator kept switching charts without making progress."""


class InconsistencyError(TorusFlowError):
    """Two independent computations that must agree did not."""
