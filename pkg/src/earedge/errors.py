"""Exception hierarchy shared across the package."""


class EarEdgeError(Exception):
    """Base class for all package errors."""


class ConfigError(EarEdgeError, ValueError):
    """Invalid configuration, scenario or corpus layout."""


class AudioFormatError(EarEdgeError, ValueError):
    """Unsupported or malformed audio container."""


class CorruptBlockError(EarEdgeError, ValueError):
    """ADPCM block that cannot be decoded."""


class ModelFormatError(EarEdgeError, ValueError):
    """Model file with a bad magic, version or layout."""
