"""Exception hierarchy.

The CLI maps these onto exit codes: ConfigError and InfeasibleError exit
with 2, DataError and its subclasses with 3, anything else with 1.
"""


class IsingTrackError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(IsingTrackError):
    """Invalid configuration: unknown key, bad type, or range violation."""


class InfeasibleError(ConfigError):
    """The requested problem cannot be satisfied (e.g. K exceeds the universe)."""


class DataError(IsingTrackError):
    """Input data is missing, malformed, or unusable."""


class ParseError(DataError):
    """A file could not be parsed (bad CSV cell, bad date, empty file)."""


class SchemaError(DataError):
    """Parsed data violates structural expectations (columns, ordering, labels)."""


class CoverageError(DataError):
    """A required mapping does not cover the asset universe."""


class InsufficientDataError(DataError):
    """Not enough history to run the requested computation."""


class DegenerateDataError(DataError):
    """Data is technically well-formed but statistically unusable
    (zero-variance benchmark, all-zero volumes, and the like)."""


class LookAheadError(IsingTrackError):
    """A selection pipeline touched data at or after its rebalance date."""
