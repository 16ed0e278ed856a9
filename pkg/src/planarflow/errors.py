"""Exception types shared across planarflow modules."""
from __future__ import annotations


class PlanarflowError(Exception):
    """Base class for planarflow-specific errors."""


class GraphFormatError(PlanarflowError):
    """A graph document is malformed or violates a record invariant."""


class PlanarityError(GraphFormatError):
    """Two edges cross in the straight-line embedding.

    Attributes:
        edge_a: id of the first offending edge.
        edge_b: id of the second offending edge.
    """

    def __init__(self, edge_a, edge_b, message: str | None = None):
        self.edge_a = edge_a
        self.edge_b = edge_b
        super().__init__(
            message or f"edges {edge_a!r} and {edge_b!r} cross in the embedding"
        )


class DisconnectedGraphError(GraphFormatError):
    """The graph is not connected."""


class StateCapExceededError(PlanarflowError):
    """State enumeration exceeded the configured cap.

    Attributes:
        cap: the configured limit.
        partial_count: number of items found before refusing.
    """

    def __init__(self, cap: int, partial_count: int, what: str = "states"):
        self.cap = cap
        self.partial_count = partial_count
        super().__init__(
            f"enumeration cap {cap} exceeded: {partial_count} {what} found before refusing"
        )


class GraphMismatchError(PlanarflowError):
    """Two objects that must refer to the same graph do not."""
