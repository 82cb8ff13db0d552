class BilliardError(ValueError):
    """Root of every error raised by the engine."""


class DegenerateSegmentError(BilliardError):
    pass


class PolygonError(BilliardError):
    pass


class SelfIntersectionError(PolygonError):
    pass


class RepeatedVertexError(PolygonError):
    pass


class ZeroAreaError(PolygonError):
    pass


class InexactCoordinateError(PolygonError):
    pass


class NotRationalError(BilliardError):
    pass


class NotConvexError(BilliardError):
    pass


class EscapeError(BilliardError):
    """The float flow lost the table; `state` is the last phase point known to be valid."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class VertexFootError(BilliardError):
    pass


class NotPeriodicError(BilliardError):
    pass


class ShortDiagonalError(BilliardError):
    pass


class EmptyOrbitError(BilliardError):
    pass


class TableFileError(BilliardError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DirectionSyntaxError(BilliardError):
    pass


class PhasePointError(BilliardError):
    """Start position outside the table or direction pointing out of it."""
