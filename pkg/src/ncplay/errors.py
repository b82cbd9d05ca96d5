"""Exception hierarchy shared by all ncplay modules."""


class PlayError(Exception):
    """Base class for every error raised by ncplay."""


class DimensionMismatch(PlayError, ValueError):
    pass


class InvalidSet(PlayError, ValueError):
    pass


class ProjectionError(PlayError):
    """Raised when a nearest point is not well defined."""


class AmbiguousProjection(ProjectionError):
    pass


class OutsideProxNeighborhood(ProjectionError):
    pass


class NotMember(PlayError, ValueError):
    pass


class SamplerExhausted(PlayError):
    pass


class InvalidPath(PlayError, ValueError):
    pass


class BadInterval(PlayError, ValueError):
    pass


class DomainMismatch(PlayError, ValueError):
    pass


class DegenerateVariation(PlayError, ValueError):
    pass


class StepTooLarge(PlayError, ValueError):
    pass


class InitialConditionViolation(PlayError, ValueError):
    pass


class GridBudgetExceeded(PlayError):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class InadmissiblePerturbation(PlayError):
    pass


class ConfigParseError(PlayError, ValueError):
    pass
