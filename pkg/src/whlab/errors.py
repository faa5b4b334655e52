"""Exception and warning types shared across the package."""


class WhlabError(Exception):
    """Base class for package errors."""


class DivergentIntegralError(WhlabError):
    """An integral required to be finite diverges for the given inputs."""


class DegenerateLevelSetError(WhlabError):
    """The level set {h = mu} is degenerate on the sampling grid; refine it."""


class UnboundedSublevelError(WhlabError):
    """The sub-level set {h < E} is not contained in the search box."""


class ZeroTemperatureError(WhlabError):
    """T = 0 requested where a thermal symbol is needed; use an indicator symbol."""


class MatrixSizeError(WhlabError):
    """Requested discretization exceeds the configured dimension cap."""

    def __init__(self, requested, cap):
        self.requested = int(requested)
        self.cap = int(cap)
        super().__init__(
            f"discretization would need dimension ~{self.requested} > cap {self.cap}"
        )


class AccuracyError(WhlabError):
    """A computation failed its internal accuracy check."""


class NonConvergedError(WhlabError):
    """An extrapolation or refinement sequence did not converge."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = tuple(trace) if trace is not None else ()


class UnconvergedWindowWarning(UserWarning):
    """Result depends on the truncation window beyond the declared threshold."""


class RefinementWarning(UserWarning):
    """A quadrature needed refinement past its shared base rule."""
