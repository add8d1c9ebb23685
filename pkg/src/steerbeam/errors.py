"""Exception types shared across the package."""


class SteerbeamError(Exception):
    """Base class for all errors raised by this package."""


class WavFormatError(SteerbeamError):
    """Raised for malformed or unsupported WAV files."""


class SceneError(SteerbeamError):
    """Raised for invalid scene descriptions or unachievable acoustics."""


class SteeringError(SteerbeamError, ValueError):
    """Raised when a requested steering angle leaves the valid range."""


class PipelineError(SteerbeamError):
    """Raised for invalid pipeline usage (wrong frame size, bad state)."""
