"""Exceptions raised by the tensor engine."""


class NumericsError(Exception):
    """Base class for tensor engine errors."""


class ShapeError(NumericsError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class IndexRangeError(NumericsError, IndexError):
    """A row or class id falls outside the table it indexes."""


class NonFiniteError(NumericsError, FloatingPointError):
    """A NaN or infinity appeared in values or gradients."""


class GraphError(NumericsError, RuntimeError):
    """Backward was requested without a usable recorded forward pass."""


class OptimizerError(NumericsError, RuntimeError):
    """An optimizer was stepped in an invalid state."""
