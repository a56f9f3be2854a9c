"""Exception hierarchy shared by every module of the package."""


class DichoSpecError(Exception):
    """Base class for all package errors."""


class ExpressionSyntaxError(DichoSpecError):
    def __init__(self, message, offset, text=""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} (at offset {offset})")


class UnknownIdentifierError(ExpressionSyntaxError):
    def __init__(self, name, offset, allowed, text=""):
        self.name = name
        self.allowed = tuple(allowed)
        msg = f"unknown identifier {name!r}; allowed names: {', '.join(self.allowed)}"
        super().__init__(msg, offset, text)


class EvaluationError(DichoSpecError):
    """Raised when a node is evaluated outside its domain."""

    def __init__(self, message, node_text="", t=None):
        self.node_text = node_text
        self.t = t
        where = f" in `{node_text}`" if node_text else ""
        at = "" if t is None else f" at t={t!r}"
        super().__init__(f"{message}{where}{at}")


class OutOfRangeError(DichoSpecError):
    """Query outside the interval covered by a cumulative integral."""


class ResourceLimitError(DichoSpecError):
    """A computation would exceed a configured size cap."""


class PreconditionError(DichoSpecError):
    """Numerical preconditions of a procedure are violated."""


class ConfigError(DichoSpecError):
    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message if key is None else f"{key}: {message}")
