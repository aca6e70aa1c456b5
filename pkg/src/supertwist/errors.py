"""Exception hierarchy shared by all modules."""


class SuperGeometryError(Exception):
    """Base class for every error raised by supertwist."""


class ChartMismatchError(SuperGeometryError):
    pass


class UnknownCoordinateError(SuperGeometryError, KeyError):
    def __str__(self) -> str:  # KeyError would otherwise repr() the message
        return str(self.args[0]) if self.args else ""


class ParityError(SuperGeometryError):
    pass


class NotInvertibleError(SuperGeometryError, ZeroDivisionError):
    pass


class JetOrderError(SuperGeometryError):
    pass


class ExpressionTooLargeError(SuperGeometryError):
    pass


class DegenerateMetricError(SuperGeometryError):
    pass


class UndefinedDenominatorError(SuperGeometryError, ZeroDivisionError):
    pass


class FrameSignatureError(SuperGeometryError, ValueError):
    pass


class ParseError(SuperGeometryError, ValueError):
    """Syntax or resolution error in an expression, with a byte offset."""

    def __init__(self, message: str, offset: int | None = None, text: str | None = None):
        self.message = message
        self.offset = offset
        self.text = text
        super().__init__(self._format())

    def _format(self) -> str:
        if self.offset is None:
            return self.message
        out = f"{self.message} (at offset {self.offset})"
        if self.text is not None:
            out += f"\n  {self.text}\n  {' ' * self.offset}^"
        return out


class ScenarioError(SuperGeometryError, ValueError):
    pass
