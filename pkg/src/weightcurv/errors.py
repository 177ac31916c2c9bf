"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can report
failures without parsing messages.
"""


class GeometryError(Exception):
    code = "geometry"


class OutsideChart(GeometryError):
    code = "outside_chart"


class SingularMetric(GeometryError):
    code = "singular_metric"


class DegeneratePlane(GeometryError):
    code = "degenerate_plane"


class InvalidN(GeometryError):
    code = "invalid_n"


class RequiresGradientDensity(GeometryError):
    code = "requires_gradient_density"


class LeftChart(GeometryError):
    """Raised when a geodesic leaves the chart; ``path`` holds the truncated part."""

    code = "left_chart"

    def __init__(self, t, path=None):
        super().__init__(f"trajectory left the chart at t={t:.6g}")
        self.t = t
        self.path = path


class BadInterval(GeometryError):
    code = "bad_interval"


class HolonomyObstruction(GeometryError):
    code = "holonomy_obstruction"


class SingularA(GeometryError):
    code = "singular_a"


class UndefinedNearZero(GeometryError):
    code = "undefined_near_zero"


class NoZeroInRange(GeometryError):
    code = "no_zero_in_range"


class NotKilling(GeometryError):
    code = "not_killing"


class HypothesisFailed(GeometryError):
    """A comparison theorem's hypothesis does not hold; the verdict is N/A."""

    code = "hypothesis_failed"

    def __init__(self, message, point=None, report=None, header=None, rows=None):
        super().__init__(message)
        self.point = point
        # optional measurements taken before the hypothesis was found to fail
        self.report = report
        self.header = header
        self.rows = rows


class HypothesisNotPositive(HypothesisFailed):
    code = "hypothesis_not_positive"


class UnknownCase(GeometryError):
    code = "unknown_case"


class _CodedError(Exception):
    """Error with a machine-readable ``code``; a per-instance code may refine the class default."""

    code = "error"

    def __init__(self, message="", code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ConfigError(_CodedError):
    code = "config_error"


class ModelError(_CodedError):
    code = "model_error"


class ExperimentError(_CodedError):
    code = "experiment_error"
