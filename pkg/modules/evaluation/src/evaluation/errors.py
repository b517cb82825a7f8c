"""Exceptions raised by the evaluation protocol."""


class EvaluationError(Exception):
    """Base class for evaluation errors."""


class EvalConfigError(EvaluationError, ValueError):
    """An EvalConfig field is out of range."""


class EmptyEvaluationError(EvaluationError, ValueError):
    """No prediction step was evaluated, so metrics are undefined."""
