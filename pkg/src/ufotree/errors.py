"""Exception types shared by every structure in the package."""


class ForestError(Exception):
    """Base class for invalid operations on a dynamic forest."""


class CycleError(ForestError):
    """Raised when a link would join two vertices that are already connected."""


class DuplicateEdge(ForestError):
    """Raised when linking an edge that is already present."""


class MissingEdge(ForestError):
    """Raised when cutting or querying an edge that is not present."""


class NotConnected(ForestError):
    """Raised by path and LCA queries on vertices in different trees."""


class DegreeError(ForestError):
    """Raised when a degree-bounded structure receives a vertex of too high degree."""


class BadSpec(ValueError):
    """Raised for an invalid workload or experiment description."""


class ParseError(ValueError):
    """Raised for malformed edge-list input; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
