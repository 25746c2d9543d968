"""
Domain types and ground-plane geometry shared by the whole toolkit.

All types are frozen dataclasses, i.e., immutable values after construction. Geometry is
two-dimensional on the ground plane; the z coordinate is carried through I/O only.
"""
import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Tuple

import cv2
import numpy as np
import shapely.geometry

from .exceptions import GeometryError, ValidationError

GROUND_PLANE = "ground"


@dataclass(frozen=True)
class GroundPoint:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise GeometryError(f"Non-finite point coordinates: ({self.x}, {self.y}, {self.z})")

    def distance_to(self, other):
        """Ground-plane (2D) Euclidean distance to another point."""
        return math.hypot(other.x - self.x, other.y - self.y)


class ClassLabel(enum.Enum):
    PERSON = "person"
    OTHER = "other"
    UNKNOWN = "unknown"


class EventKind(enum.Enum):
    FIRST_DETECTED = "first"
    LOST = "lost"
    FOUND = "found"
    ENDED = "end"


@dataclass(frozen=True)
class Observation:
    t: float
    frame: int
    position: GroundPoint
    width: float = 0.0
    height: float = 0.0
    depth: float = 0.0
    class_label: ClassLabel = ClassLabel.UNKNOWN
    interpolated: bool = False

    def __post_init__(self):
        if not self.t >= 0:
            raise ValidationError(f"Observation timestamp must be non-negative, got {self.t!r}")
        if min(self.width, self.height, self.depth) < 0:
            raise ValidationError("Observation dimensions must be non-negative")


@dataclass(frozen=True)
class TrackEvent:
    kind: EventKind
    t: float
    position: GroundPoint
    # None when the source did not provide it; see features.estimate_neighbor_counts()
    neighbor_count: Optional[int] = 0

    def __post_init__(self):
        if self.neighbor_count is not None and self.neighbor_count < 0:
            raise ValidationError("Event neighbor count must be non-negative")


@dataclass(frozen=True)
class Trajectory:
    """
    Time-ordered observations of one tracked object, plus its tracking events.

    Invariants: at least one observation; strictly increasing timestamps; the first event is
    the only FirstDetected event; at most one Ended event; event times are non-decreasing; Lost
    and Found events alternate, starting with Lost.
    """
    id: str
    observations: Tuple[Observation, ...]
    events: Tuple[TrackEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'observations', tuple(self.observations))
        object.__setattr__(self, 'events', tuple(self.events))

        if not self.observations:
            raise ValidationError(f"Trajectory {self.id!r} has no observations")

        times = [obs.t for obs in self.observations]
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ValidationError(f"Trajectory {self.id!r}: observation timestamps are not strictly increasing")

        kinds = [event.kind for event in self.events]
        if kinds.count(EventKind.FIRST_DETECTED) != 1 or kinds[0] != EventKind.FIRST_DETECTED:
            raise ValidationError(f"Trajectory {self.id!r}: expected exactly one leading FirstDetected event")
        if kinds.count(EventKind.ENDED) > 1:
            raise ValidationError(f"Trajectory {self.id!r}: more than one Ended event")

        event_times = [event.t for event in self.events]
        if any(t1 > t2 for t1, t2 in zip(event_times, event_times[1:])):
            raise ValidationError(f"Trajectory {self.id!r}: events are not time-ordered")

        expected = EventKind.LOST
        for kind in kinds:
            if kind in (EventKind.LOST, EventKind.FOUND):
                if kind != expected:
                    raise ValidationError(f"Trajectory {self.id!r}: Lost and Found events do not alternate")
                expected = EventKind.FOUND if kind == EventKind.LOST else EventKind.LOST

    @property
    def first(self):
        return self.observations[0]

    @property
    def last(self):
        return self.observations[-1]

    @property
    def duration(self):
        return self.last.t - self.first.t

    @property
    def lost_events(self):
        return [event for event in self.events if event.kind == EventKind.LOST]

    def events_of(self, *kinds):
        return [event for event in self.events if event.kind in kinds]

    @property
    def pending_lost_event(self):
        """The final Lost event if no Found event follows it, else None."""
        for event in reversed(self.events):
            if event.kind == EventKind.FOUND:
                return None
            if event.kind == EventKind.LOST:
                return event
        return None

    @property
    def is_pending_lost(self):
        return self.pending_lost_event is not None

    def observation_count(self, include_interpolated=False):
        if include_interpolated:
            return len(self.observations)
        return sum(1 for obs in self.observations if not obs.interpolated)

    def positions_array(self):
        """Return an (N, 2) array of ground-plane positions."""
        return np.array([(obs.position.x, obs.position.y) for obs in self.observations], dtype=np.float64)


class ZoneKind(enum.Enum):
    ENTRY = "entry"
    EXIT = "exit"
    IN_OUT = "inout"
    LOST = "lost"
    FOUND = "found"
    LOST_FOUND = "lostfound"

    @property
    def is_entry_like(self):
        return self in (ZoneKind.ENTRY, ZoneKind.IN_OUT)

    @property
    def is_exit_like(self):
        return self in (ZoneKind.EXIT, ZoneKind.IN_OUT)

    @property
    def is_lost_like(self):
        return self in (ZoneKind.LOST, ZoneKind.LOST_FOUND)

    @property
    def is_found_like(self):
        return self in (ZoneKind.FOUND, ZoneKind.LOST_FOUND)


ENTRY_KINDS = frozenset((ZoneKind.ENTRY, ZoneKind.IN_OUT))
EXIT_KINDS = frozenset((ZoneKind.EXIT, ZoneKind.IN_OUT))
LOST_KINDS = frozenset((ZoneKind.LOST, ZoneKind.LOST_FOUND))
FOUND_KINDS = frozenset((ZoneKind.FOUND, ZoneKind.LOST_FOUND))


@dataclass(frozen=True)
class Zone:
    """
    Named ground-plane polygon with a zone kind.

    The outline must have at least three vertices and form a simple polygon with positive area.
    """
    ident: int
    name: str
    kind: ZoneKind
    outline: Tuple[GroundPoint, ...]
    plane_name: str = GROUND_PLANE

    def __post_init__(self):
        object.__setattr__(self, 'outline', tuple(self.outline))

        if len(self.outline) < 3:
            raise GeometryError(f"Zone {self.ident} ({self.name!r}) needs at least 3 outline points")

        coords = [(p.x, p.y) for p in self.outline]
        if not shapely.geometry.LinearRing(coords).is_simple:
            raise GeometryError(f"Zone {self.ident} ({self.name!r}) outline is self-intersecting")
        if not shapely.geometry.Polygon(coords).area > 0:
            raise GeometryError(f"Zone {self.ident} ({self.name!r}) outline has zero area")

    @cached_property
    def contour(self):
        # OpenCV contour layout: (N, 1, 2), float32
        return np.array([[[p.x, p.y]] for p in self.outline], dtype=np.float32)

    @cached_property
    def bounds(self):
        """Axis-aligned bounding rectangle as (x_min, y_min, x_max, y_max)."""
        xs = [p.x for p in self.outline]
        ys = [p.y for p in self.outline]
        return min(xs), min(ys), max(xs), max(ys)

    @property
    def area(self):
        return abs(float(cv2.contourArea(self.contour)))


def rectangle_outline(x_min, y_min, x_max, y_max):
    """Four-point outline of an axis-aligned rectangle, in the vertex order used by the zone files."""
    return (
        GroundPoint(x_min, y_min),
        GroundPoint(x_min, y_max),
        GroundPoint(x_max, y_max),
        GroundPoint(x_max, y_min),
    )


def contains_point(zone, point):
    """
    Check whether a ground point lies inside a zone (even-odd rule).

    Points on the polygon boundary count as inside.

    Parameters
    ----------
    zone : Zone
        The zone to test against.
    point : GroundPoint
        The point to test.

    Returns
    -------
    bool
        True iff the point is inside or on the boundary of the zone outline.
    """
    x_min, y_min, x_max, y_max = zone.bounds
    if not (x_min <= point.x <= x_max and y_min <= point.y <= y_max):
        return False
    # pointPolygonTest(): +1 inside, 0 on the edge, -1 outside
    return cv2.pointPolygonTest(zone.contour, (float(point.x), float(point.y)), False) >= 0


@dataclass(frozen=True)
class SceneModel:
    """
    Learned scene context: zones, feature normalization statistics and zone triplets.
    """
    zones: Tuple[Zone, ...] = ()
    norm_stats: Optional[object] = None  # features.NormalizationStats
    triplets: Tuple[object, ...] = field(default=())  # triplets.ZoneTriplet

    def __post_init__(self):
        object.__setattr__(self, 'zones', tuple(sorted(self.zones, key=lambda zone: zone.ident)))
        object.__setattr__(self, 'triplets', tuple(self.triplets))

        idents = [zone.ident for zone in self.zones]
        if len(set(idents)) != len(idents):
            raise ValidationError(f"Duplicate zone idents in scene: {idents}")

    def zone(self, ident):
        for zone in self.zones:
            if zone.ident == ident:
                return zone
        raise KeyError(ident)

    def zones_of_kind(self, kinds):
        return [zone for zone in self.zones if zone.kind in kinds]

    def next_ident(self):
        return max((zone.ident for zone in self.zones), default=0) + 1

    def with_zones(self, zones):
        return replace(self, zones=tuple(zones))


def zones_containing(scene, point, kinds=None):
    """
    Find all zones of a scene that contain the given point.

    Parameters
    ----------
    scene : SceneModel
        The scene whose zones are searched.
    point : GroundPoint
        The point to locate.
    kinds : iterable of ZoneKind, optional
        If given, only zones of these kinds are considered.

    Returns
    -------
    zones : list of Zone
        Matching zones, ordered by ascending ident.
    """
    kinds = frozenset(kinds) if kinds is not None else None
    return [
        zone for zone in scene.zones
        if (kinds is None or zone.kind in kinds) and contains_point(zone, point)
    ]


def first_zone_containing(scene, point, kinds):
    """Lowest-ident zone of the given kinds containing the point, or None."""
    zones = zones_containing(scene, point, kinds)
    return zones[0] if zones else None
