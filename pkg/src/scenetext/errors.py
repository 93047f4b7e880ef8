"""Exception types raised across the engine."""


class SceneTextError(Exception):
    """Base class for all engine errors."""


class ValidationError(SceneTextError, ValueError):
    """An input violates a documented precondition."""


class IngestionError(SceneTextError, OSError):
    """A file could not be read or decoded."""


class PlacementFailure(SceneTextError):
    """Text could not be sized or positioned inside a region."""


class SceneRejected(SceneTextError):
    """A scene produced no usable text placement."""
