"""Exception types shared across the package."""


class LatstepError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(LatstepError):
    """Invalid configuration value or unparseable config file."""


class NonFiniteStateError(LatstepError):
    """A state variable left the finite domain (numerical blow-up upstream)."""


class PhaseUndefinedError(LatstepError):
    """Oscillator too close to the origin for a meaningful phase angle."""


class InsufficientDataError(LatstepError):
    """A measurement needs more cycles/samples than the trace provides."""


class GeometryError(LatstepError):
    """Requested motion is outside the mechanism's reachable geometry."""


class DegenerateSupportError(LatstepError):
    """Support force balance degenerate (e.g. free fall); no pressure point."""


class SafetyStopError(LatstepError):
    """Reflex exceeded its step budget without converging."""
