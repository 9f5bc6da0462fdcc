"""Exception types shared across the package."""


class GaplessModeError(ValueError):
    """A wave vector sits exactly on a gap-closing point, where the Bogoliubov angle is undefined."""


class NumericError(ArithmeticError):
    """Overflow beyond the recoverable log-space range, or an aliased Fourier reconstruction."""


class SizeLimitError(ValueError):
    """Exact enumeration requested for a chain that is too long."""


class ConfigError(ValueError):
    """Invalid sweep or CLI configuration.

    ``key`` names the offending configuration entry.
    """

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
