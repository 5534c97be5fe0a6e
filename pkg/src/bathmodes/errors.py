"""Exception types shared across the package."""


class BathmodesError(Exception):
    """Base class for all package-specific errors."""


class DivergentIntegralError(BathmodesError):
    """Requested integral does not converge (non-square-integrable coupling)."""


class MarkovianKernelError(BathmodesError):
    """Memory kernel is a delta distribution (flat coupling); no pointwise value."""


class UnsupportedKernelError(BathmodesError):
    """Memory kernel is distributional and not representable pointwise."""


class BreakdownError(BathmodesError):
    """Orthogonal-polynomial recurrence broke down (measure support too small)."""


class BracketError(BathmodesError):
    """Root bracketing failed during parameter selection."""


class DimensionCapError(BathmodesError):
    """Joint Hilbert-space dimension exceeds the configured cap."""


class ConfigError(BathmodesError):
    """Experiment configuration is malformed or incomplete."""
