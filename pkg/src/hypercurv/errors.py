"""Exception hierarchy for hypercurv."""


class HypercurvError(Exception):
    """Base class for all library errors."""


class GeometryError(HypercurvError, ValueError):
    pass


class NonPositiveRadius(GeometryError):
    pass


class RadiusOutOfRange(GeometryError):
    pass


class DegenerateMetric(GeometryError):
    pass


class NotAdmissible(GeometryError):
    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = list(nodes)


class OutOfRange(GeometryError):
    pass


class ScaleOutOfRange(GeometryError):
    pass


class GridMismatch(HypercurvError, ValueError):
    pass


class NotAtBoundary(HypercurvError, ValueError):
    pass


class NotAtMaximum(HypercurvError, ValueError):
    pass


class PsiExpressionError(HypercurvError, ValueError):
    pass


class ConfigError(HypercurvError, ValueError):
    pass


class SolverError(HypercurvError, RuntimeError):
    """Raised when a Newton/continuation solve cannot proceed."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class LineSearchFailed(SolverError):
    pass


class MaxItersExceeded(SolverError):
    pass


class LeftAnnulus(SolverError):
    pass


class LostAdmissibility(SolverError):
    pass


class LinearSolveFailed(SolverError):
    pass


class PsiConditionsFailed(HypercurvError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
