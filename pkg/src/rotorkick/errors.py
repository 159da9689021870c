"""Exception types distinguishing numerical failures from bad input."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure on valid input."""


class ConvergenceError(NumericalError):
    """A truncated series or iteration did not reach its target tolerance."""


class NormalizationError(NumericalError):
    """A state that should be normalized is not (basis too small, corrupt data)."""


class PropagationError(NumericalError):
    """Time propagation became unstable (norm drift beyond tolerance)."""
