class ToolkitError(Exception):
    """Base class for all errors raised by the toolkit."""


class ValidationError(ToolkitError, ValueError):
    """
    Invalid input data.

    Parameters
    ----------
    message : str
        Human-readable description of the problem.
    source : str, optional
        Name of the offending file, if known.
    line : int, optional
        1-based line number within the source, if known.
    """

    def __init__(self, message, source=None, line=None):
        super().__init__(message)
        self.message = message
        self.source = source
        self.line = line

    def with_source(self, source):
        """Return the same error with the source file name attached."""
        self.source = source
        return self

    def __str__(self):
        location = ""
        if self.source is not None:
            location = f"{self.source}"
            if self.line is not None:
                location += f":{self.line}"
            location += ": "
        elif self.line is not None:
            location = f"line {self.line}: "
        return location + self.message


class ZoneFileError(ValidationError):
    """Malformed or inconsistent zone XML document."""


class UnsupportedZoneKindError(ZoneFileError):
    """Zone property string that does not map to any zone kind."""


class GeometryError(ValidationError):
    """Degenerate or invalid ground-plane geometry."""


class TrajectoryFileError(ValidationError):
    """Trajectory record file violating the record invariants."""


class TripletFileError(ValidationError):
    """Malformed zone triplet table."""


class WeightError(ValidationError):
    """Feature weights violating the weight-vector invariant."""


class ConfigError(ValidationError):
    """Invalid run configuration."""


class FeatureError(ToolkitError, ValueError):
    """Feature statistics requested on unusable input."""


class ClusteringError(ToolkitError, ValueError):
    """Clustering requested with an infeasible number of clusters."""
