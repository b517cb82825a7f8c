"""Exceptions raised by the recommender model."""


class ParsRecError(Exception):
    """Base class for model errors."""


class ModelConfigError(ParsRecError, ValueError):
    """A ModelConfig field is out of range or contradicts another."""


class EmptyBasketError(ParsRecError, ValueError):
    """A feeding decision was requested with no basket items left."""
