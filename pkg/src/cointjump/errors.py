"""Exception hierarchy. The CLI maps these onto exit codes."""


class CointJumpError(Exception):
    """Base class for all library errors."""


class DomainError(CointJumpError, ValueError):
    """An argument lies outside the domain of an operation."""


class StepSizeError(DomainError):
    """The time step is too large for the one-step jump law to be a probability."""


class CurveError(DomainError):
    """A maturity lies outside the support of a forward curve."""


class NumericalError(CointJumpError, ArithmeticError):
    """A numerical procedure lost accuracy or did not converge."""


class InstabilityError(NumericalError):
    """Cancellation produced a clearly negative probability."""

    def __init__(self, message: str, cell: tuple[int, int]):
        super().__init__(f"{message} at (m, n) = {cell}")
        self.cell = cell


class TruncationError(NumericalError):
    """A truncated series did not converge to the requested tolerance."""


class FitError(NumericalError):
    """Calibration failed. ``diagnostics`` holds whatever was learned."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(CointJumpError, ValueError):
    """Invalid run configuration or input file."""
