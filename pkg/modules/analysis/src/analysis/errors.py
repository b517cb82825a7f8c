"""Exceptions raised by the interpretability experiments."""


class AnalysisError(Exception):
    """Base class for analysis errors."""


class AnalysisConfigError(AnalysisError, ValueError):
    """An AnalysisConfig field is out of range."""


class EmptyGroupError(AnalysisError, ValueError):
    """A user group has no user with collected attention."""
