"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration (bad parameters, malformed config file)."""


class EnumerationCapError(ConfigError):
    """Codebook enumeration would exceed the configured size cap."""


class PsdViolationError(ArithmeticError):
    """A correlation matrix is numerically not positive semidefinite."""
