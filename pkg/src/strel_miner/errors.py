"""Exception hierarchy shared across the toolkit."""


class StrelMinerError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(StrelMinerError, ValueError):
    """Invalid configuration or invalid arguments to a construction routine."""


class DataError(StrelMinerError, ValueError):
    """Malformed or inconsistent input data (locations, traces)."""


class FormulaSyntaxError(StrelMinerError, ValueError):
    """Raised by the formula parser; carries the character offset of the problem."""

    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class EvaluationError(StrelMinerError):
    """A formula could not be evaluated against a model and trace."""


class TemplateError(StrelMinerError, ValueError):
    """A parametric template is malformed or not monotone."""


class ProjectionError(StrelMinerError):
    """A location admits no projection (its most permissive instance is violated)."""
