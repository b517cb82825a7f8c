"""Exceptions raised by the command-line laboratory."""


class LabError(Exception):
    """Base class for lab errors."""


class ConfigError(LabError, ValueError):
    """A run config key is unknown, mistyped or out of range."""


class MissingArtifactError(LabError, FileNotFoundError):
    """A subcommand needs a file an earlier subcommand should have written."""
