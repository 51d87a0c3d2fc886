"""Exception hierarchy for the termnet package."""


class TermnetError(Exception):
    """Base class for all package-specific errors."""


class GraphError(TermnetError, ValueError):
    """Malformed communication graph (bad ids, self-loops, duplicates)."""


class DisconnectedGraphError(GraphError):
    """Operation requires a connected graph but the graph is not connected."""


class MessageError(TermnetError, ValueError):
    """Inbox does not match the neighbor set or carries a wrong iteration stamp."""


class ScenarioError(TermnetError, ValueError):
    """Scenario content is invalid or internally contradictory."""


class ScenarioFormatError(ScenarioError):
    """Scenario file cannot be parsed or violates the schema.

    ``location`` holds a human-readable pointer (field path or line/column).
    """

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class SimulationInvariantError(TermnetError, RuntimeError):
    """A run violated an internal invariant (for example, a live agent
    depended on a message from an agent that already stopped)."""
