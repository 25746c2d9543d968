import numpy as np
import pytest
from hypothesis import given, strategies as st

from trajectory_repair_toolkit.exceptions import GeometryError, ValidationError
from trajectory_repair_toolkit.model import (
    EventKind,
    GroundPoint,
    Observation,
    SceneModel,
    TrackEvent,
    Trajectory,
    Zone,
    ZoneKind,
    contains_point,
    first_zone_containing,
    rectangle_outline,
    zones_containing,
)

UNIT_SQUARE = Zone(1, "UnitSquare", ZoneKind.ENTRY, rectangle_outline(0.0, 0.0, 1.0, 1.0))

# Convex hexagon, counter-clockwise
HEXAGON_VERTICES = ((2.0, 0.0), (6.0, 0.0), (8.0, 4.0), (6.0, 8.0), (2.0, 8.0), (0.0, 4.0))


def _half_plane_test(vertices, x, y):
    # Inside (or on the boundary of) a counter-clockwise convex polygon
    for (x1, y1), (x2, y2) in zip(vertices, vertices[1:] + vertices[:1]):
        if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) < 0:
            return False
    return True


@pytest.mark.parametrize("point, expected", [
    ((0.5, 0.5), True),
    ((2.0, 2.0), False),
    ((1.0, 0.5), True),
    ((0.0, 0.0), True),
    ((-0.001, 0.5), False),
])
def test_contains_point_unit_square(point, expected):
    assert contains_point(UNIT_SQUARE, GroundPoint(*point)) == expected


def test_contains_point_matches_half_plane_oracle():
    zone = Zone(5, "Hexagon", ZoneKind.LOST, [GroundPoint(x, y) for x, y in HEXAGON_VERTICES])

    rng = np.random.default_rng(0)
    for x, y in rng.uniform(-1.0, 9.0, (1000, 2)):
        assert contains_point(zone, GroundPoint(x, y)) == _half_plane_test(HEXAGON_VERTICES, x, y)


@given(
    shift=st.integers(min_value=0, max_value=5),
    x=st.floats(min_value=-1.0, max_value=9.0),
    y=st.floats(min_value=-1.0, max_value=9.0),
)
def test_contains_point_invariant_under_vertex_rotation(shift, x, y):
    vertices = HEXAGON_VERTICES[shift:] + HEXAGON_VERTICES[:shift]
    original = Zone(5, "Hexagon", ZoneKind.LOST, [GroundPoint(*v) for v in HEXAGON_VERTICES])
    rotated = Zone(5, "Hexagon", ZoneKind.LOST, [GroundPoint(*v) for v in vertices])

    point = GroundPoint(x, y)
    assert contains_point(rotated, point) == contains_point(original, point)


def test_zones_containing_is_ordered_by_ident():
    scene = SceneModel(zones=(
        Zone(7, "Lost", ZoneKind.LOST, rectangle_outline(0.0, 0.0, 4.0, 4.0)),
        Zone(3, "LostFound", ZoneKind.LOST_FOUND, rectangle_outline(2.0, 2.0, 6.0, 6.0)),
        Zone(1, "Entry", ZoneKind.ENTRY, rectangle_outline(10.0, 10.0, 12.0, 12.0)),
    ))

    zones = zones_containing(scene, GroundPoint(3.0, 3.0))
    assert [zone.ident for zone in zones] == [3, 7]

    assert zones_containing(scene, GroundPoint(11.0, 11.0), {ZoneKind.ENTRY}) == [scene.zone(1)]
    assert zones_containing(scene, GroundPoint(11.0, 11.0), {ZoneKind.LOST}) == []
    assert zones_containing(scene, GroundPoint(50.0, 50.0)) == []

    assert first_zone_containing(scene, GroundPoint(3.0, 3.0), {ZoneKind.LOST}).ident == 7


def test_scene_rejects_duplicate_idents():
    zone = Zone(1, "A", ZoneKind.ENTRY, rectangle_outline(0.0, 0.0, 1.0, 1.0))
    with pytest.raises(ValidationError):
        SceneModel(zones=(zone, zone))


def test_scene_next_ident():
    assert SceneModel().next_ident() == 1
    scene = SceneModel(zones=(Zone(9, "A", ZoneKind.ENTRY, rectangle_outline(0.0, 0.0, 1.0, 1.0)), ))
    assert scene.next_ident() == 10


def test_zone_geometry_validation():
    with pytest.raises(GeometryError):
        Zone(1, "Segment", ZoneKind.ENTRY, [GroundPoint(0.0, 0.0), GroundPoint(1.0, 1.0)])

    # Bow-tie outline
    with pytest.raises(GeometryError):
        Zone(1, "BowTie", ZoneKind.ENTRY,
             [GroundPoint(0.0, 0.0), GroundPoint(1.0, 1.0), GroundPoint(1.0, 0.0), GroundPoint(0.0, 1.0)])

    # Collinear points
    with pytest.raises(GeometryError):
        Zone(1, "Line", ZoneKind.ENTRY, [GroundPoint(0.0, 0.0), GroundPoint(1.0, 0.0), GroundPoint(2.0, 0.0)])


def test_zone_area_and_bounds():
    zone = Zone(1, "Rect", ZoneKind.EXIT, rectangle_outline(-2.0, 1.0, 3.0, 5.0))
    assert zone.bounds == (-2.0, 1.0, 3.0, 5.0)
    assert zone.area == pytest.approx(20.0)


def _observation(t, x=0.0):
    return Observation(t=t, frame=int(t), position=GroundPoint(x, 0.0))


def _event(kind, t, x=0.0):
    return TrackEvent(kind, t, GroundPoint(x, 0.0))


def test_trajectory_invariants():
    observations = [_observation(0.0), _observation(1.0, 1.0), _observation(2.0, 2.0)]

    trajectory = Trajectory("1", observations, [
        _event(EventKind.FIRST_DETECTED, 0.0),
        _event(EventKind.LOST, 1.0, 1.0),
        _event(EventKind.FOUND, 2.0, 2.0),
        _event(EventKind.ENDED, 2.0, 2.0),
    ])
    assert trajectory.duration == 2.0
    assert not trajectory.is_pending_lost
    assert len(trajectory.lost_events) == 1

    # Timestamps must be strictly increasing
    with pytest.raises(ValidationError):
        Trajectory("2", [_observation(0.0), _observation(0.0)], [_event(EventKind.FIRST_DETECTED, 0.0)])

    # Exactly one leading FirstDetected event
    with pytest.raises(ValidationError):
        Trajectory("3", observations, [_event(EventKind.LOST, 1.0)])
    with pytest.raises(ValidationError):
        Trajectory("4", observations, [_event(EventKind.FIRST_DETECTED, 0.0), _event(EventKind.FIRST_DETECTED, 1.0)])

    # Lost and Found alternate
    with pytest.raises(ValidationError):
        Trajectory("5", observations, [_event(EventKind.FIRST_DETECTED, 0.0), _event(EventKind.FOUND, 1.0)])
    with pytest.raises(ValidationError):
        Trajectory("6", observations, [
            _event(EventKind.FIRST_DETECTED, 0.0),
            _event(EventKind.LOST, 1.0),
            _event(EventKind.LOST, 2.0),
        ])

    # No observations
    with pytest.raises(ValidationError):
        Trajectory("7", [], [_event(EventKind.FIRST_DETECTED, 0.0)])


def test_pending_lost_event():
    observations = [_observation(0.0), _observation(1.0, 1.0)]
    trajectory = Trajectory("1", observations, [
        _event(EventKind.FIRST_DETECTED, 0.0),
        _event(EventKind.LOST, 1.0, 1.0),
        _event(EventKind.ENDED, 1.0, 1.0),
    ])
    assert trajectory.is_pending_lost
    assert trajectory.pending_lost_event.t == 1.0
