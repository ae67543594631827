"""Exception types shared across the library."""


class DimensionError(ValueError):
    """Raised when array shapes or point dimensionalities are incompatible."""


class FormatError(ValueError):
    """Raised when a file does not conform to its declared format."""


class ConfigError(ValueError):
    """Raised when a configuration is internally inconsistent or unsupported."""
