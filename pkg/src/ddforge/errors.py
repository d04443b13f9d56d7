"""Exception types shared across the package."""


class DDForgeError(Exception):
    """Base class for package errors."""


class ConfigError(DDForgeError, ValueError):
    """Invalid experiment configuration or physical parameters."""


class NumericalError(DDForgeError, RuntimeError):
    """A numerical routine failed to reach its stated accuracy."""


class QuadratureError(NumericalError):
    pass


class StepSizeError(NumericalError):
    pass


class LifetimeError(NumericalError):
    """Threshold crossing could not be located on a curve that does cross."""
