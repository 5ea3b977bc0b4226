from __future__ import annotations


class SGraphsError(Exception):
    """Base class for every error raised by sgraphs."""


class ConfigError(SGraphsError):
    pass


class DataError(SGraphsError):
    """Input data is missing, malformed or unusable."""


class BadDataset(DataError):
    pass


class EmptyInput(DataError):
    pass


class EmptyCloud(DataError):
    pass


class NoOverlap(DataError):
    """Two trajectories share no associable timestamps."""


class IoError(SGraphsError, OSError):
    pass


class GraphError(SGraphsError):
    pass


class UnknownVariable(GraphError):
    pass


class UnknownKeyframe(UnknownVariable):
    pass


class KindMismatch(GraphError):
    pass


class SingularSystem(GraphError):
    """Normal equations are rank deficient, usually a missing anchor."""


class GeometryError(SGraphsError):
    pass


class NotOpposed(GeometryError):
    pass


class InsufficientWalls(GeometryError):
    pass


class ScanMatchError(SGraphsError):
    pass


class InsufficientOverlap(ScanMatchError):
    pass


class SimulationError(SGraphsError):
    pass


class PoseInWall(SimulationError):
    pass


class WaypointInWall(SimulationError):
    pass
