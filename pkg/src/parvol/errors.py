"""Exception types raised across the package."""


class ParvolError(Exception):
    """Base class for every error this package raises on purpose."""


class UnsupportedShape(ParvolError):
    pass


class InvalidGeometry(ParvolError, ValueError):
    pass


class InconclusiveTail(ParvolError):
    pass


class DegenerateFit(ParvolError):
    pass


class SummabilityViolated(ParvolError, ValueError):
    pass


class ConditionViolated(ParvolError, ValueError):
    pass


class SeparationCheckFailed(ParvolError):
    pass


class BoundViolated(ParvolError):
    pass


class PackingOverflow(ParvolError):
    pass


class GridTooLarge(ParvolError, MemoryError):
    pass


class EmptySet(ParvolError, ValueError):
    pass


class RadiusOutOfBand(ParvolError, ValueError):
    pass


class UnknownKind(ParvolError, ValueError):
    pass


class EmptyLevelSet(ParvolError):
    pass


class InsufficientSamples(ParvolError, ValueError):
    pass


class EmptyCloud(ParvolError, ValueError):
    pass


class DimensionError(ParvolError, TypeError):
    pass


class ScheduleRejected(ParvolError, ValueError):
    """A radius schedule crosses a second non-differentiability point."""
