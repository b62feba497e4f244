"""Exception types raised across the package."""


class InfoIntegrateError(Exception):
    """Base class for all package errors."""


class MapFormatError(InfoIntegrateError, ValueError):
    pass


class DeadAgent(InfoIntegrateError):
    """The agent died (lava) and can no longer act."""


class Untraversable(InfoIntegrateError, ValueError):
    """A position lies inside a wall, inside lava, or outside the map."""


class KernelTooLarge(InfoIntegrateError, ValueError):
    pass


class DimensionMismatch(InfoIntegrateError, ValueError):
    pass


class EmptyList(InfoIntegrateError, ValueError):
    pass


class NoFeasibleCandidate(InfoIntegrateError):
    """Every candidate of a local grid search was untraversable."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DemonstratorFailed(InfoIntegrateError):
    pass


class CorruptDemo(InfoIntegrateError):
    pass


class CandidateUnreachable(InfoIntegrateError):
    pass


class BudgetExhausted(InfoIntegrateError):
    pass


class CyclicDescription(InfoIntegrateError, ValueError):
    pass


class ContradictoryIndependence(InfoIntegrateError, ValueError):
    pass


class LogTooShort(InfoIntegrateError, ValueError):
    pass


class UnknownVariable(InfoIntegrateError, KeyError):
    pass
