"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """An argument is outside its documented domain."""


class CalibrationError(RuntimeError):
    """Threshold calibration failed to converge.

    Carries the last bisection bracket so callers can inspect how far the
    search got.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class DisconnectedGraphError(ValueError):
    """The operation needs a connected graph.

    ``witnesses`` holds one vertex from each of two distinct components.
    """

    def __init__(self, message, witnesses=None):
        super().__init__(message)
        self.witnesses = witnesses


class NotTwoEdgeConnectedError(ValueError):
    """The operation needs a 2-edge-connected graph.

    ``violation`` is a bridge edge, or a pair of vertices in different
    components when the graph is not even connected.
    """

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class InvalidWalkError(ValueError):
    """A vertex sequence does not describe a valid closed walk."""


class SizeGuardError(ValueError):
    """An exhaustive enumeration would exceed the configured size guard."""
