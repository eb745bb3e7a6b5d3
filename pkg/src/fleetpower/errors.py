"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
anything else -> 3.
"""


class FleetPowerError(Exception):
    """Base class for all package errors."""


class ConfigError(FleetPowerError):
    """Invalid configuration, flags, or usage."""


class DataError(FleetPowerError):
    """Invalid, missing, or inconsistent input data."""


class ParseError(DataError):
    """Malformed input file; message carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = "%s:" % path
        if line is not None:
            prefix += "%d:" % line
        super().__init__(prefix + (" " if prefix else "") + message)
