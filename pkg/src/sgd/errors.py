"""Exception types shared across the toolkit."""


class SgdError(Exception):
    """Base class for all diagram-level errors."""


class SgdSyntaxError(SgdError):
    """Malformed SGD source text (carries a 1-based line number)."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DanglingHalfEdge(SgdError):
    """A half-edge label is not used exactly once in node slots and once in arcs."""


class MalformedCrossing(SgdError):
    """A crossing node does not have exactly four slots."""


class NonSpherical(SgdError):
    """Rotation system does not embed on the sphere; carries the genus surrogate."""

    def __init__(self, defect: int):
        super().__init__(f"V - E + F - 1 - C = {defect}, expected 0")
        self.defect = defect


class UnknownCrossing(SgdError):
    pass


class UnknownFace(SgdError):
    pass


class UnknownVertex(SgdError):
    pass


class NotEulerian(SgdError):
    """A component has odd-degree vertices; carries (component, odd vertex ids)."""

    def __init__(self, component, odd_vertices):
        super().__init__(f"component {component} has odd vertices {sorted(odd_vertices)}")
        self.component = component
        self.odd_vertices = frozenset(odd_vertices)


class NotConnected(SgdError):
    pass


class OddInterCrossingParity(SgdError):
    """Inter-component crossing count came out odd; the diagram is corrupted."""


class NonContiguousPairing(SgdError):
    pass


class EvenTerminalVertex(SgdError):
    pass


class OddInteriorVertex(SgdError):
    pass


class PathNotIncident(SgdError):
    pass


class CrossingOnSameComponent(SgdError):
    pass


class NotRetractable(SgdError):
    """Spur crossings are not uniformly positioned; the region set was not applied."""


class NotAKnotComponent(SgdError):
    pass


class NonPlanarGraph(SgdError):
    pass


class TooLarge(SgdError):
    pass


class ReplayError(SgdError):
    pass


class TheoremViolation(AssertionError):
    """A solve that the theory guarantees satisfiable came back unsatisfiable.

    Raised as an assertion: at desk scale this would falsify the theory the
    decision procedures rest on, so the run must abort loudly.
    """
