"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A waveform, channel, or experiment parameter is invalid."""


class InputShapeError(ValueError):
    """An input array has the wrong length or shape."""


class NumericError(ArithmeticError):
    """Non-finite values reached a numeric routine."""


class EstimationError(ValueError):
    """Not enough data to estimate a requested quantity."""
