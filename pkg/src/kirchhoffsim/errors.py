"""Exception types shared across the package."""


class KirchhoffError(Exception):
    """Base class for all package-specific errors."""


class AllZeroInitialData(KirchhoffError, ValueError):
    """Initial displacement is identically zero (the model requires u0 != 0)."""


class DimensionMismatch(KirchhoffError, ValueError):
    """A coefficient vector does not match the spectrum length."""


class NonPositiveEigenvalue(KirchhoffError, ValueError):
    """Eigenvalue frequencies must be strictly positive."""


class NonPositiveGamma(KirchhoffError, ValueError):
    """The nonlinearity exponent must be strictly positive."""


class InvalidBand(KirchhoffError, ValueError):
    """Band split point mu must exceed the base frequency nu."""


class StepUnderflow(KirchhoffError, RuntimeError):
    """The controller drove dt below dt_min: stiffness it cannot resolve."""


class BlowupDetected(KirchhoffError, RuntimeError):
    """|A^{1/2}u|^2 exceeded 10x its initial value; epsilon is outside the
    decay regime for this data."""


class ToleranceNotMet(KirchhoffError, RuntimeError):
    """The high-accuracy reference integrator failed to meet its tolerance."""


class DegenerateTrace(KirchhoffError, ValueError):
    """A diagnostic needed b > 0 at a sample where b vanished."""


class InsufficientTail(KirchhoffError, ValueError):
    """Not enough trailing samples (or decades) to estimate a limit."""


class ConfigError(KirchhoffError, ValueError):
    """Malformed or inconsistent run configuration."""
