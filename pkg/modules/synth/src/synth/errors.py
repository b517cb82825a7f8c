"""Exceptions raised while generating, storing or checking datasets."""


class SynthError(Exception):
    """Base class for synthesis errors."""


class InvalidConfigError(SynthError, ValueError):
    """A SynthConfig field is out of range."""


class InvalidPlanError(SynthError, ValueError):
    """A covariance block plan is malformed."""


class NotPositiveDefiniteError(InvalidPlanError):
    """A matrix that must be positive definite failed Cholesky factorization."""


class DatasetFormatError(SynthError, ValueError):
    """A dataset or metadata file is malformed, truncated or of another version."""
