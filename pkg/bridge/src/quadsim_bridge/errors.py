class BridgeError(Exception):
    """Base class for bridge failures."""


class ProtocolFailure(BridgeError):
    """The server answered ok=false or the connection broke."""


class ConformanceError(BridgeError):
    """An environment violated the episodic API contract."""
