"""Exception hierarchy shared across the package."""


class StabcsError(Exception):
    """Base class for all errors raised by stabcs."""


class QuadratureUnderResolved(StabcsError):
    pass


class NotSymmetric(StabcsError, ValueError):
    pass


class NoConvergence(StabcsError):
    pass


class EmptyWindow(StabcsError):
    pass


class OverlappingCrossings(StabcsError):
    pass


class SignTrackingFailure(StabcsError):
    pass


class MinimumAtBoundary(StabcsError):
    pass


class NegativeDiscriminant(StabcsError):
    pass


class NoRoot(StabcsError):
    pass


class NoRealRoot(StabcsError):
    pass


class ThresholdViolation(StabcsError, ValueError):
    pass


class IllConditioned(StabcsError):
    pass


class TrackingLost(StabcsError):
    pass


class UnstableWindow(StabcsError):
    pass


class NoStationaryPoint(StabcsError):
    pass


class SchemaError(StabcsError, ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(StabcsError, ValueError):
    pass
