"""Exception hierarchy shared across the toolkit.

Concrete errors live next to the code that raises them; everything derives
from one of the two roots below so the CLI can map failures to exit codes
(config/usage problems vs. bad input data).
"""


class WavevolError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(WavevolError):
    """A parameter or configuration value is invalid."""


class DataError(WavevolError):
    """The input data cannot support the requested computation."""
