"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MfxwlError(Exception):
    exit_code = 1


class InputError(MfxwlError, ValueError):
    """Unreadable, missing or malformed input data."""

    exit_code = 2


class ConfigError(MfxwlError, ValueError):
    """Invalid analysis or generator parameters."""

    exit_code = 3


class NumericalError(MfxwlError, ValueError):
    """Degenerate numerical input (zero leaders, empty scale range, ...)."""

    exit_code = 4
