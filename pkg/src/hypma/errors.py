"""Exception types raised by the solver modules."""


class HypmaError(Exception):
    """Base class; ``name`` is what the CLI prints on failure."""

    @property
    def name(self) -> str:
        return type(self).__name__


class GridError(HypmaError, ValueError):
    pass


class NonHyperbolic(HypmaError):
    """f^2 is not strictly positive at some node."""


class EmptyCandidates(HypmaError):
    """No real feasible critical point was found for the P-minimization."""

    def __init__(self, msg, nodes=None):
        super().__init__(msg)
        self.nodes = nodes


class DegenerateSegment(HypmaError, ValueError):
    pass


class AdjacencyBroken(HypmaError, ValueError):
    pass


class DegenerateMapping(HypmaError):
    """All boundary images on a source segment collapsed to one point."""


class SingularSystem(HypmaError):
    pass


class UnknownCase(HypmaError, KeyError):
    pass
