"""Exception hierarchy shared by all otsbound modules."""

from __future__ import annotations


class OTSError(Exception):
    """Base class for every error raised by otsbound."""


class InvalidArgument(OTSError, ValueError):
    pass


class ParseError(OTSError):
    """A case document could not be read.

    ``path`` is a JSON path (``$.buses[2].demand``) for native documents or a
    matrix name for MATPOWER input.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnsupportedLine(ParseError):
    pass


class MissingRating(ParseError):
    pass


class UnsupportedCost(ParseError):
    pass


class IslandingError(OTSError):
    """The fixed lines do not connect the buses a computation needs connected.

    ``components`` lists the connected components (sets of bus ids) of the
    fixed subgraph; ``line_id`` names the flexible line whose endpoints are
    separated, when the failure is specific to one line.
    """

    def __init__(self, message: str, components: list[set[int]] | None = None,
                 line_id: int | None = None):
        self.components = components or []
        self.line_id = line_id
        super().__init__(message)


class TooLarge(OTSError):
    pass


class EmptyRestriction(OTSError):
    """No feasible point has the line switched off."""


class IncompleteBounds(OTSError):
    pass


class CostKindMismatch(OTSError):
    pass


class QuadraticNotRepresentable(OTSError):
    pass


class NumericalError(OTSError):
    pass
