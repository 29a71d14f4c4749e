"""Exception types shared across the package."""


class WavegateError(Exception):
    """Base class for all package errors."""


class GridError(WavegateError):
    """A grid cannot support the requested operation (too coarse, mismatched, ...)."""


class ConfigError(WavegateError):
    """Invalid configuration input (unknown key, bad value, unknown scenario)."""


class DataFormatError(WavegateError):
    """Malformed or inconsistent data file."""
